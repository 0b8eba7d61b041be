#pragma once

// Scattering wavefunctions, amplitude, S-matrix and the three physical
// constraints (optical theorem, reciprocity, reality) for point interactions.

#include <span>
#include <utility>
#include <vector>

#include "pscat/krein.hpp"
#include "pscat/types.hpp"

namespace pscat {

/// Unit vector on S².
class Direction {
public:
    /// Normalizes `v`; throws DomainError for a zero or non-finite vector.
    explicit Direction(const Vec3& v);
    static Direction spherical(double polar, double azimuth);

    const Vec3& vec() const { return unit_; }
    Direction operator-() const { return Direction(-unit_); }

private:
    Vec3 unit_;
};

/// Quadrature rule on S² with weights summing to 4π.
struct SphereQuadrature {
    std::vector<Direction> nodes;
    std::vector<double> weights;
    int degree = 0;

    /// Gauss–Legendre in cos(polar) times uniform azimuth; exact for spherical
    /// harmonics up to degree `degree`.
    static SphereQuadrature tensor(int degree);
};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Scattering solution at a fixed real wavenumber k (k < 0 allowed: z^{1/2} = k).
class ScatteringSolution {
public:
    ScatteringSolution(const Configuration& config, double k);

    /// Ψ(x, k, ω). Throws DomainError when x coincides with a scatterer.
    cplx wave(const Direction& omega, const Vec3& x) const;
    /// A(ω', ω, k).
    cplx amplitude(const Direction& omega_out, const Direction& omega_in) const;

    double k() const { return k_; }
    const KreinMatrix& krein() const { return krein_; }
    const Configuration& config() const { return config_; }

private:
    Configuration config_;
    double k_;
    KreinMatrix krein_;
};

cplx scattering_wave(const Configuration& config, double k, const Direction& omega, const Vec3& x);

cplx amplitude(const Configuration& config, double k, const Direction& omega_out, const Direction& omega_in);

/// (S f)(ω) at the quadrature nodes; the inner products use the quadrature weights.
CVector s_matrix_apply(const Configuration& config, double k, const SphereQuadrature& quad, const CVector& f);

/// The matrix of S on the quadrature nodes (acting on nodal values).
CMatrix s_matrix_dense(const Configuration& config, double k, const SphereQuadrature& quad);

/// Quadrature norm (Σ w |f|²)^{1/2}.
double quadrature_norm(const SphereQuadrature& quad, const CVector& f);

/// |Im A(ω', ω) - (4π)^{-1} k Σ_quad A(ω'', ω) conj(A(ω'', ω'))|, with Im taken as the
/// kernel imaginary part (A(ω', ω) - conj(A(ω, ω'))) / (2i).
double optical_theorem_residual(const Configuration& config, double k, const SphereQuadrature& quad,
                                const Direction& omega_out, const Direction& omega_in);

using DirectionPair = std::pair<Direction, Direction>;

/// max |A(ω', ω, k) - A(-ω, -ω', k)| over (ω', ω) pairs.
double reciprocity_defect(const Configuration& config, double k, std::span<const DirectionPair> pairs);

/// max |conj(A(ω', ω, k)) - A(ω', ω, -k)| over (ω', ω) pairs.
double reality_defect(const Configuration& config, double k, std::span<const DirectionPair> pairs);

/// max over `trials` seeded random f of | ‖S f‖ / ‖f‖ - 1 |.
double unitarity_defect(const Configuration& config, double k, const SphereQuadrature& quad, int trials,
                        std::uint64_t seed);

/// Directions drawn uniformly on S² from a seeded generator.
std::vector<Direction> random_directions(std::size_t count, std::uint64_t seed);

}  // namespace pscat
