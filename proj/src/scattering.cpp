#include "pscat/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "pscat/errors.hpp"
#include "pscat/random.hpp"

namespace pscat {

namespace {

KreinMatrix real_axis_krein(const Configuration& config, double k) {
    if (!(k != 0.0) || !std::isfinite(k)) throw DomainError("wavenumber k must be finite and non-zero");
    return krein_matrix(config, ComplexEnergy::from_wavenumber(k));
}

// e^{i k ω·ξ_j} for every scatterer.
CVector plane_phases(const std::vector<Vec3>& xi, double k, const Vec3& omega) {
    CVector v(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) v(j) = std::exp(kI * (k * omega.dot(xi[j])));
    return v;
}

}  // namespace

ScatteringSolution::ScatteringSolution(const Configuration& config, double k)
    : config_(config), k_(k), krein_(real_axis_krein(config, k)) {}

cplx ScatteringSolution::wave(const Direction& omega, const Vec3& x) const {
    const auto& xi = config_.xi();
    CVector outgoing(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        const double r = (x - xi[j]).norm();
        if (r == 0.0) throw DomainError("scattering_wave: x coincides with a scatterer");
        outgoing(j) = g0_3d(krein_.z, r);
    }
    const CVector incoming = plane_phases(xi, k_, omega.vec());
    return std::exp(kI * (k_ * omega.vec().dot(x))) + cplx(outgoing.transpose() * krein_.p * incoming);
}

cplx ScatteringSolution::amplitude(const Direction& omega_out, const Direction& omega_in) const {
    const auto& xi = config_.xi();
    const CVector in = plane_phases(xi, k_, omega_in.vec());
    const CVector out = plane_phases(xi, k_, omega_out.vec());
    return cplx(out.adjoint() * krein_.p * in) / kFourPi;
}

cplx scattering_wave(const Configuration& config, double k, const Direction& omega, const Vec3& x) {
    return ScatteringSolution(config, k).wave(omega, x);
}

cplx amplitude(const Configuration& config, double k, const Direction& omega_out, const Direction& omega_in) {
    return ScatteringSolution(config, k).amplitude(omega_out, omega_in);
}

namespace {

// E_qj = e^{-i k ξ_j·ω_q}.
CMatrix node_phases(const std::vector<Vec3>& xi, double k, const SphereQuadrature& quad) {
    CMatrix e(quad.nodes.size(), xi.size());
    for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
        for (std::size_t j = 0; j < xi.size(); ++j) {
            e(q, j) = std::exp(-kI * (k * xi[j].dot(quad.nodes[q].vec())));
        }
    }
    return e;
}

Eigen::VectorXd weight_vector(const SphereQuadrature& quad) {
    return Eigen::Map<const Eigen::VectorXd>(quad.weights.data(), Eigen::Index(quad.weights.size()));
}

}  // namespace

CVector s_matrix_apply(const Configuration& config, double k, const SphereQuadrature& quad, const CVector& f) {
    if (f.size() != Eigen::Index(quad.nodes.size())) {
        throw DomainError("s_matrix_apply: f must have one value per quadrature node");
    }
    const KreinMatrix krein = real_axis_krein(config, k);
    const CMatrix e = node_phases(config.xi(), k, quad);
    const CVector projections = e.adjoint() * (weight_vector(quad).cast<cplx>().asDiagonal() * f);
    return f + (kI * k / (8.0 * kPi * kPi)) * (e * (krein.p * projections));
}

CMatrix s_matrix_dense(const Configuration& config, double k, const SphereQuadrature& quad) {
    const KreinMatrix krein = real_axis_krein(config, k);
    const CMatrix e = node_phases(config.xi(), k, quad);
    const auto m = Eigen::Index(quad.nodes.size());
    CMatrix s = CMatrix::Identity(m, m);
    s += (kI * k / (8.0 * kPi * kPi)) * e * krein.p * e.adjoint() *
         weight_vector(quad).cast<cplx>().asDiagonal();
    return s;
}

double quadrature_norm(const SphereQuadrature& quad, const CVector& f) {
    double sum = 0.0;
    for (Eigen::Index q = 0; q < f.size(); ++q) sum += quad.weights[q] * std::norm(f(q));
    return std::sqrt(sum);
}

double optical_theorem_residual(const Configuration& config, double k, const SphereQuadrature& quad,
                                const Direction& omega_out, const Direction& omega_in) {
    const ScatteringSolution sol(config, k);
    const cplx kernel_imag =
        (sol.amplitude(omega_out, omega_in) - std::conj(sol.amplitude(omega_in, omega_out))) / (2.0 * kI);
    cplx integral = 0.0;
    for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
        const auto& node = quad.nodes[q];
        integral += quad.weights[q] * sol.amplitude(node, omega_in) * std::conj(sol.amplitude(node, omega_out));
    }
    return std::abs(kernel_imag - k / kFourPi * integral);
}

double reciprocity_defect(const Configuration& config, double k, std::span<const DirectionPair> pairs) {
    const ScatteringSolution sol(config, k);
    double worst = 0.0;
    for (const auto& [out, in] : pairs) {
        worst = std::max(worst, std::abs(sol.amplitude(out, in) - sol.amplitude(-in, -out)));
    }
    return worst;
}

double reality_defect(const Configuration& config, double k, std::span<const DirectionPair> pairs) {
    const ScatteringSolution plus(config, k);
    const ScatteringSolution minus(config, -k);
    double worst = 0.0;
    for (const auto& [out, in] : pairs) {
        worst = std::max(worst, std::abs(std::conj(plus.amplitude(out, in)) - minus.amplitude(out, in)));
    }
    return worst;
}

double unitarity_defect(const Configuration& config, double k, const SphereQuadrature& quad, int trials,
                        std::uint64_t seed) {
    const CMatrix s = s_matrix_dense(config, k, quad);
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        CVector f(quad.nodes.size());
        for (Eigen::Index q = 0; q < f.size(); ++q) f(q) = rng.complex_normal(1.0);
        const CVector sf = s * f;
        worst = std::max(worst, std::abs(quadrature_norm(quad, sf) / quadrature_norm(quad, f) - 1.0));
    }
    return worst;
}

std::vector<Direction> random_directions(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Direction> out;
    out.reserve(count);
    while (out.size() < count) {
        const Vec3 v(rng.normal(), rng.normal(), rng.normal());
        if (v.norm() > 1e-8) out.emplace_back(v);
    }
    return out;
}

}  // namespace pscat
