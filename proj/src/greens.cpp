#include "pscat/greens.hpp"

#include <cmath>
#include <string>

#include "pscat/errors.hpp"

namespace pscat {

namespace {

// Upper-branch roots of ±i.
const cplx kRootMinusI{-kInvSqrt2, kInvSqrt2};
const cplx kRootI{kInvSqrt2, kInvSqrt2};

// Window around z = ±i inside which the removable singularities are expanded.
constexpr double kSingularWindow = 1e-6;

void require_positive_distance(double r, const char* who) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError(std::string(who) + ": distance must be positive and finite, got r = " +
                          std::to_string(r));
    }
}

void require_off_spectrum(const ComplexEnergy& z, const char* who) {
    if (z.on_positive_axis()) {
        throw DomainError(std::string(who) + ": z must lie off [0, inf), got z = " +
                          std::to_string(z.value().real()));
    }
}

cplx g0_at_root(cplx root, double r) { return std::exp(kI * root * r) / (kFourPi * r); }

// dG0/dz and d²G0/dz² at fixed r, expressed through the root s = z^{1/2}.
cplx g0_dz(cplx s, double r) { return kI * std::exp(kI * s * r) / (8.0 * kPi * s); }

cplx g0_dz2(cplx s, double r) {
    return kI * std::exp(kI * s * r) * (kI * r * s - 1.0) / (16.0 * kPi * s * s * s);
}

}  // namespace

cplx sqrt_upper(cplx z) {
    cplx w = std::sqrt(z);
    if (w.imag() < 0.0) w = -w;
    // Positive real axis: std::sqrt already returns +√z with zero imaginary part.
    if (w.imag() == 0.0 && w.real() < 0.0) w = -w;
    return w;
}

cplx g0_3d(const ComplexEnergy& z, double r) {
    require_positive_distance(r, "g0_3d");
    return g0_at_root(z.root(), r);
}

cplx g0_3d_dr(const ComplexEnergy& z, double r) {
    require_positive_distance(r, "g0_3d_dr");
    return g0_at_root(z.root(), r) * (kI * z.root() - 1.0 / r);
}

cplx g0_2d(const ComplexEnergy& z, double r) {
    require_positive_distance(r, "g0_2d");
    if (z.root() == 0.0) throw DomainError("g0_2d: z = 0 is a logarithmic singularity");
    return 0.25 * kI * hankel1_0(z.root() * r);
}

cplx g0_1d(const ComplexEnergy& z, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("g0_1d: distance must be non-negative");
    if (z.root() == 0.0) throw DomainError("g0_1d: z = 0 is a pole of z^{-1/2}");
    return 0.5 * kI / z.root() * std::exp(kI * z.root() * r);
}

cplx re_g0(const ComplexEnergy& z, double r) {
    const ComplexEnergy zbar = z.conjugate();
    return 0.5 * (g0_3d(z, r) + g0_3d(zbar, r));
}

cplx im_g0(const ComplexEnergy& z, double r) {
    const ComplexEnergy zbar = z.conjugate();
    return (g0_3d(z, r) - g0_3d(zbar, r)) / (2.0 * kI);
}

double basis_norm_sq() { return 1.0 / (kFourPi * std::sqrt(2.0)); }

double basis_overlap(double r) { return im_g0(ComplexEnergy(kI), r).real(); }

cplx gram_diag(const ComplexEnergy& z) {
    require_off_spectrum(z, "gram_diag");
    const cplx zv = z.value();
    const cplx s = z.root();
    if (std::abs(zv - kI) < kSingularWindow || std::abs(zv + kI) < kSingularWindow) {
        // Both factors z ∓ i cancel against the bracket; this is the continuation through ±i.
        return -1.0 / (kFourPi * std::sqrt(2.0) * (s + kRootMinusI) * (s + kRootI));
    }
    const cplx bracket = kI * s - kI * kRootMinusI - kInvSqrt2 * (zv + kI);
    return bracket / (kFourPi * (zv * zv + 1.0));
}

cplx gram_offdiag(const ComplexEnergy& z, double r) {
    require_off_spectrum(z, "gram_offdiag");
    require_positive_distance(r, "gram_offdiag");
    const cplx zv = z.value();
    const cplx g_plus = g0_at_root(kRootI, r);
    const cplx g_minus = g0_at_root(kRootMinusI, r);
    const cplx im_g_i = (g_plus - g_minus) / (2.0 * kI);

    if (std::abs(zv - kI) < kSingularWindow) {
        // F = [g(z) - g(i)] / (z - i) with g(z) = (G0(z) - G0(-i)) / (z + i).
        const cplx delta = zv - kI;
        const cplx w = 2.0 * kI;
        const cplx d = g_plus - g_minus;
        const cplx d1 = g0_dz(kRootI, r);
        const cplx d2 = g0_dz2(kRootI, r);
        const cplx g1 = d1 / w - d / (w * w);
        const cplx g2 = d2 / w - 2.0 * d1 / (w * w) + 2.0 * d / (w * w * w);
        return g1 + 0.5 * g2 * delta;
    }
    if (std::abs(zv + kI) < kSingularWindow) {
        const cplx delta = zv + kI;
        const cplx h = g0_dz(kRootMinusI, r) + 0.5 * g0_dz2(kRootMinusI, r) * delta;
        return (h - im_g_i) / (zv - kI);
    }
    return (g0_3d(z, r) - g_minus) / (zv * zv + 1.0) - im_g_i / (zv - kI);
}

cplx basis_inner(const ComplexEnergy& z1, const ComplexEnergy& z2, double r) {
    const cplx s1 = z1.root();
    const cplx s2 = z2.root();
    if (r == 0.0) {
        // i (s1 - s2) / (4π (z1 - z2)) with z1 - z2 = (s1 - s2)(s1 + s2).
        return kI / (kFourPi * (s1 + s2));
    }
    require_positive_distance(r, "basis_inner");
    if (z1.value() == z2.value() && s1 == s2) return g0_dz(s1, r);
    return (g0_at_root(s1, r) - g0_at_root(s2, r)) / (z1.value() - z2.value());
}

}  // namespace pscat
