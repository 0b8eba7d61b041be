#include <cmath>

#include "pscat/errors.hpp"
#include "pscat/greens.hpp"

namespace pscat {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kSeriesRadius = 2.0;
constexpr double kAsymptoticRadius = 17.0;

cplx hankel_series(cplx w) {
    const cplx q = 0.25 * w * w;
    cplx term = 1.0;  // (-q)^m / (m!)^2
    cplx j0 = 1.0;
    cplx tail = 0.0;  // Σ_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2
    double harmonic = 0.0;
    for (int m = 1; m < 60; ++m) {
        term *= -q / (double(m) * double(m));
        harmonic += 1.0 / m;
        j0 += term;
        tail -= harmonic * term;
        if (std::abs(term) * (1.0 + harmonic) < 1e-18 * std::abs(j0)) break;
    }
    const cplx y0 = (2.0 / kPi) * ((std::log(0.5 * w) + kEulerGamma) * j0 + tail);
    return j0 + kI * y0;
}

cplx hankel_prefactor(cplx w) {
    return std::sqrt(2.0 / (kPi * w)) * std::exp(kI * (w - 0.25 * kPi));
}

// H0^(1)(w) = sqrt(2/(πw)) e^{i(w-π/4)} π^{-1/2} ∫_R e^{-v²} (1 + i v² / (2w))^{-1/2} dv.
// The integrand is analytic in a strip of half-width >= sqrt(|w|), so the
// trapezoidal rule converges geometrically.
cplx hankel_integral(cplx w) {
    constexpr double h = 0.2;
    constexpr int half = 33;
    const cplx c = kI / (2.0 * w);
    cplx sum = 1.0;
    for (int j = 1; j <= half; ++j) {
        const double v2 = (j * h) * (j * h);
        sum += 2.0 * std::exp(-v2) / std::sqrt(1.0 + c * v2);
    }
    return hankel_prefactor(w) * sum * h / std::sqrt(kPi);
}

cplx hankel_asymptotic(cplx w) {
    cplx sum = 1.0;
    cplx term = 1.0;
    double previous = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -kI * odd * odd / (8.0 * k * w);
        const double size = std::abs(term);
        if (size > previous) break;
        sum += term;
        previous = size;
        if (size < 1e-17) break;
    }
    return hankel_prefactor(w) * sum;
}

}  // namespace

cplx hankel1_0(cplx w) {
    if (w == 0.0) throw DomainError("hankel1_0: logarithmic singularity at w = 0");
    if (w.imag() < 0.0) throw DomainError("hankel1_0: requires Im(w) >= 0");
    const double size = std::abs(w);
    if (size <= kSeriesRadius) return hankel_series(w);
    if (size < kAsymptoticRadius) return hankel_integral(w);
    return hankel_asymptotic(w);
}

}  // namespace pscat
