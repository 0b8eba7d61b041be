#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pscat/types.hpp"

namespace pscat {

/// Seeded source of uniform and standard-normal deviates.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard, with
/// explicit conversions (53-bit uniforms, Box–Muller normals) so a seed gives the
/// same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return radius * std::cos(2.0 * kPi * u2);
    }

    /// Complex deviate with independent N(0, sigma²) real and imaginary parts.
    cplx complex_normal(double sigma) {
        const double re = normal();
        const double im = normal();
        return {sigma * re, sigma * im};
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace pscat
