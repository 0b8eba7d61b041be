#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace pscat {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr cplx kI{0.0, 1.0};

/// Lifts a plane point (x1, x2) to (x1, x2, 0).
inline Vec3 on_plane(const Point2& p) { return {p.x(), p.y(), 0.0}; }

/// Strict lexicographic order on (x1, x2, x3).
inline bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
}

}  // namespace pscat
