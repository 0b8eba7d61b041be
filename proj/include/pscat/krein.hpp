#pragma once

// Generalized point interactions: the Krein matrix P_{θ,Ξ}(z), the perturbed
// Green's function, and the local (α-parametrized) special case.

#include <span>
#include <vector>

#include "pscat/greens.hpp"
#include "pscat/types.hpp"

namespace pscat {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kExclusionTol = 1e-9;

/// Frobenius norm of (A - A*) / 2.
double hermiticity_defect(const CMatrix& a);

/// Hermitian matrix θ whose spectrum avoids the poles (2m + 1)π of tan(θ/2).
class ThetaMatrix {
public:
    /// Throws ValidationError when θ is not Hermitian to 1e-12 or an eigenvalue
    /// sits within 1e-9 of a pole of tan(·/2).
    explicit ThetaMatrix(CMatrix theta);

    const CMatrix& matrix() const { return theta_; }
    Eigen::Index size() const { return theta_.rows(); }

private:
    CMatrix theta_;
};

/// tan(θ/2) through the Hermitian eigendecomposition of θ.
CMatrix theta_to_tan_half(const ThetaMatrix& theta);

/// Principal-branch inverse: θ = 2 atan(T) with spectrum in (-π, π).
ThetaMatrix tan_half_to_theta(const CMatrix& tan_half);

/// Scatterer positions Ξ with the Hermitian boundary matrix T = tan(θ/2).
///
/// Positions are stored in lexicographic order with T permuted alongside, so two
/// configurations describing the same operator compare equal.
class Configuration {
public:
    /// Validates n >= 1, pairwise distinct points, T Hermitian to 1e-12 and, when
    /// `half_space` is set, ξ_3 < 0 for every point.
    Configuration(std::vector<Vec3> xi, CMatrix tan_half_theta, bool half_space = false);

    std::size_t size() const { return xi_.size(); }
    const std::vector<Vec3>& xi() const { return xi_; }
    const CMatrix& tan_half_theta() const { return tan_half_; }
    bool half_space() const { return half_space_; }

    bool hermitian_ok() const { return hermitian_ok_; }
    bool symmetric() const { return symmetric_; }
    bool real() const { return real_; }
    double min_separation() const { return min_separation_; }
    /// max_j,j' |ξ_j - ξ_j'|.
    double diameter() const;

private:
    std::vector<Vec3> xi_;
    CMatrix tan_half_;
    bool half_space_;
    bool hermitian_ok_ = false;
    bool symmetric_ = false;
    bool real_ = false;
    double min_separation_ = 0.0;
};

/// Builds T from local couplings: T_jj = α_j + (4π)^{-1} 2^{-1/2}, T_jj' = -Re(G0(i, ξ_j - ξ_j')).
Configuration alpha_to_config(std::span<const double> alpha, std::vector<Vec3> xi,
                              bool half_space = false);

/// P_{θ,Ξ}(z)^{-1} in closed form.
CMatrix p_inverse(const Configuration& config, const ComplexEnergy& z);

/// D(z) such that T = P^{-1}(z) + D(z).
CMatrix tan_half_offset(std::span<const Vec3> xi, const ComplexEnergy& z);

struct KreinMatrix {
    ComplexEnergy z;
    CMatrix p_inverse;
    CMatrix p;
    cplx det_p_inverse;
    double condition_estimate;
};

/// LU-inverts P^{-1}(z) with one refinement step. Throws NearResonance when the
/// 1-norm condition number exceeds 1e12 or det P^{-1} vanishes.
KreinMatrix krein_matrix(const Configuration& config, const ComplexEnergy& z);

/// Real-axis entry point: z = k², z^{1/2} = k.
KreinMatrix krein_matrix_at_wavenumber(const Configuration& config, double k);

/// G_{θ,Ξ}(z, x, y) with P(z) computed once.
class PerturbedGreen {
public:
    PerturbedGreen(const Configuration& config, const ComplexEnergy& z);

    /// Throws DomainError when x = y or either point coincides with a scatterer.
    cplx operator()(const Vec3& x, const Vec3& y) const;
    /// Scattered part Σ P_jj' G0(x - ξ_j) G0(y - ξ_j').
    cplx scattered(const Vec3& x, const Vec3& y) const;

    const KreinMatrix& krein() const { return krein_; }
    const Configuration& config() const { return config_; }

private:
    CVector basis_at(const Vec3& x) const;

    Configuration config_;
    KreinMatrix krein_;
};

cplx perturbed_green(const Configuration& config, const ComplexEnergy& z, const Vec3& x, const Vec3& y);

/// Γ_{α,Ξ}(z) for local point interactions, in the source ordering of `xi`.
CMatrix gamma_matrix(std::span<const double> alpha, std::span<const Vec3> xi, const ComplexEnergy& z);

/// Green's function of the local family evaluated directly through Γ^{-1}.
cplx local_green(std::span<const double> alpha, std::span<const Vec3> xi, const ComplexEnergy& z,
                 const Vec3& x, const Vec3& y);

/// ‖P^{-1}(z1) - P^{-1}(z2) + (z1 - z2) Gram(z1, z2)‖_F with Gram_jj' = (u_j(z̄1), u_j'(z2))
/// assembled from gram_diag / gram_offdiag and the basis overlaps at z = i.
double krein_identity_residual(const Configuration& config, const ComplexEnergy& z1,
                               const ComplexEnergy& z2);

/// Frobenius norm of P(z) - P(z)^t, the asymmetry of G_{θ,Ξ}(z, x, y) under x ↔ y.
double green_asymmetry(const KreinMatrix& krein);

}  // namespace pscat
