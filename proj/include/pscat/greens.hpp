#pragma once

// Free-space Helmholtz Green's functions G0(z, r) = (-Δ - z)^{-1}(x, y), r = |x - y|,
// with the branch Im(z^{1/2}) > 0, and the closed-form Gram quantities of the
// point-interaction deficiency basis u_j(z) = G0(z, · - ξ_j).

#include "pscat/types.hpp"

namespace pscat {

/// Square root with Im(w) > 0 off [0, ∞); on [0, ∞) the upper boundary value +√z.
cplx sqrt_upper(cplx z);

/// A spectral parameter z together with the root z^{1/2} used in every kernel.
///
/// Off the real half-line the root is always the upper branch. `from_wavenumber`
/// is the real-axis entry point: z = k² with root exactly k, including k < 0,
/// which is how A(ω', ω, -k) is evaluated.
class ComplexEnergy {
public:
    explicit ComplexEnergy(cplx z) : z_(z), root_(sqrt_upper(z)) {}

    static ComplexEnergy from_wavenumber(double k) { return ComplexEnergy(cplx(k * k, 0.0), cplx(k, 0.0)); }

    cplx value() const { return z_; }
    cplx root() const { return root_; }
    bool on_positive_axis() const { return z_.imag() == 0.0 && z_.real() >= 0.0; }
    /// z̄ with root -conj(root); on the positive axis this is the lower boundary value.
    ComplexEnergy conjugate() const { return ComplexEnergy(std::conj(z_), -std::conj(root_)); }

private:
    ComplexEnergy(cplx z, cplx root) : z_(z), root_(root) {}
    cplx z_;
    cplx root_;
};

/// exp(i z^{1/2} r) / (4π r). Throws DomainError for r <= 0.
cplx g0_3d(const ComplexEnergy& z, double r);

/// d/dr of g0_3d.
cplx g0_3d_dr(const ComplexEnergy& z, double r);

/// (i/4) H0^(1)(z^{1/2} r). Throws DomainError for r <= 0.
cplx g0_2d(const ComplexEnergy& z, double r);

/// (i/2) z^{-1/2} exp(i z^{1/2} r); finite at r = 0. Throws DomainError for z = 0 or r < 0.
cplx g0_1d(const ComplexEnergy& z, double r);

/// Hankel function H0^(1)(w) for Im(w) >= 0, w != 0.
///
/// Three regimes: ascending series for |w| <= 2, trapezoidal quadrature of
/// Hankel's Laplace-type integral for 2 < |w| < 17, asymptotic expansion beyond.
cplx hankel1_0(cplx w);

/// Re(G0(z, r)) in the sense [G0(z, r) + G0(z̄, r)] / 2.
cplx re_g0(const ComplexEnergy& z, double r);

/// Im(G0(z, r)) in the sense [G0(z, r) - G0(z̄, r)] / (2i).
cplx im_g0(const ComplexEnergy& z, double r);

/// (u_j(i), u_j(i)) = (4π √2)^{-1}.
double basis_norm_sq();

/// (u_j(i), u_j'(i)) = Im(G0(i, r)) for r = |ξ_j - ξ_j'| > 0.
double basis_overlap(double r);

/// (u_j(i), (-Δ - z)^{-1} u_j(i)) in closed form. z must lie off [0, ∞).
cplx gram_diag(const ComplexEnergy& z);

/// (u_j(i), (-Δ - z)^{-1} u_j'(i)) for r = |ξ_j - ξ_j'| > 0, z off [0, ∞).
cplx gram_offdiag(const ComplexEnergy& z, double r);

/// (u_j(z̄1), u_j'(z2)) by the first resolvent equation; r = 0 gives the diagonal.
///
/// With z1 = z̄, z2 = z this is (u_j(z), u_j'(z)), and Im(z) times it equals
/// Im(G0(z, r)) (r > 0) or Re(z^{1/2}) / (4π) (r = 0).
cplx basis_inner(const ComplexEnergy& z1, const ComplexEnergy& z2, double r);

}  // namespace pscat
