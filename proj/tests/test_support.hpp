#pragma once

// Shared generators and helpers for the test binaries.

#include <cmath>
#include <vector>

#include "pscat/inverse.hpp"
#include "pscat/krein.hpp"
#include "pscat/random.hpp"

namespace pscat::testing {

inline double rel_err(cplx got, cplx want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

inline CMatrix random_hermitian(Rng& rng, std::size_t n, double scale) {
    CMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
    }
    return scale * 0.5 * (a + a.adjoint());
}

inline CMatrix random_real_symmetric(Rng& rng, std::size_t n, double scale) {
    return CMatrix(random_hermitian(rng, n, scale).real().cast<cplx>());
}

/// n points with pairwise separation >= min_sep inside a cube of half-width `half`.
inline std::vector<Vec3> random_points(Rng& rng, std::size_t n, double half, double min_sep, double z_lo = 0.0,
                                       double z_hi = 0.0) {
    const bool slab = z_lo < z_hi;
    std::vector<Vec3> out;
    while (out.size() < n) {
        Vec3 p(rng.uniform(-half, half), rng.uniform(-half, half),
               slab ? rng.uniform(z_lo, z_hi) : rng.uniform(-half, half));
        bool ok = true;
        for (const auto& q : out) ok = ok && (p - q).norm() >= min_sep;
        if (ok) out.push_back(p);
    }
    return out;
}

/// Random configuration with n scatterers inside a ball of diameter <= diam.
inline Configuration random_config(Rng& rng, std::size_t n, double diam, double t_scale) {
    const double half = diam / (2.0 * std::sqrt(3.0));
    auto xi = random_points(rng, n, half, 0.1 * half);
    return Configuration(std::move(xi), random_hermitian(rng, n, t_scale));
}

/// Exact plane data G(σ, y) for σ on the lattice y + h·Z² within `radius` of y.
inline PlaneSamples slice_samples(const Configuration& config, double k0, double radius, double h, const Point2& y) {
    const PerturbedGreen green(config, ComplexEnergy::from_wavenumber(k0));
    PlaneSamples s;
    s.k0 = k0;
    const int n = int(std::ceil(radius / h));
    for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
            if (i == 0 && j == 0) continue;
            const Point2 x = y + h * Point2(i, j);
            if ((x - y).norm() > radius) continue;
            s.pairs.push_back(PlanePair{x, y, green(on_plane(x), on_plane(y))});
        }
    }
    return s;
}

}  // namespace pscat::testing
