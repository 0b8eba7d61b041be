#include <algorithm>
#include <cmath>

#include "pscat/errors.hpp"
#include "pscat/scattering.hpp"

namespace pscat {

Direction::Direction(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("direction vector must be finite and non-zero");
    unit_ = v / n;
}

Direction Direction::spherical(double polar, double azimuth) {
    return Direction(Vec3(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
                          std::cos(polar)));
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    return {x, w};
}

SphereQuadrature SphereQuadrature::tensor(int degree) {
    if (degree < 0) throw DomainError("quadrature degree must be non-negative");
    const int n_polar = degree / 2 + 1;  // exact for polynomials of degree 2 n_polar - 1 >= degree
    const int n_azimuth = degree + 1;    // exact for trigonometric degree <= degree
    auto [mu, wmu] = gauss_legendre(n_polar);
    SphereQuadrature quad;
    quad.degree = degree;
    quad.nodes.reserve(std::size_t(n_polar) * n_azimuth);
    quad.weights.reserve(std::size_t(n_polar) * n_azimuth);
    const double dphi = 2.0 * kPi / n_azimuth;
    for (int i = 0; i < n_polar; ++i) {
        const double sin_polar = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
        for (int j = 0; j < n_azimuth; ++j) {
            const double phi = (j + 0.5) * dphi;
            quad.nodes.emplace_back(Vec3(sin_polar * std::cos(phi), sin_polar * std::sin(phi), mu[i]));
            quad.weights.push_back(wmu[i] * dphi);
        }
    }
    return quad;
}

}  // namespace pscat
