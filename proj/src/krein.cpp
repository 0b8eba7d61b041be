#include "pscat/krein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pscat/errors.hpp"

namespace pscat {

namespace {

// Diagonal constant (4π)^{-1} 2^{-1/2} shared by P^{-1} and the α ↔ T map.
const double kDiagShift = kInvSqrt2 / kFourPi;

double scaled_tol(const CMatrix& a) { return kHermitianTol * std::max(1.0, a.norm()); }

double distance_to_tan_half_pole(double eigenvalue) {
    return std::abs(std::remainder(eigenvalue - kPi, 2.0 * kPi));
}

cplx re_g0_at_i(double r) { return re_g0(ComplexEnergy(kI), r); }

}  // namespace

double hermiticity_defect(const CMatrix& a) { return 0.5 * (a - a.adjoint()).norm(); }

ThetaMatrix::ThetaMatrix(CMatrix theta) : theta_(std::move(theta)) {
    if (theta_.rows() == 0 || theta_.rows() != theta_.cols()) {
        throw ValidationError("theta must be a non-empty square matrix");
    }
    const double defect = hermiticity_defect(theta_);
    if (defect > scaled_tol(theta_)) {
        std::ostringstream msg;
        msg << "theta is not Hermitian: defect " << defect;
        throw ValidationError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(theta_, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double lambda = eig.eigenvalues()(i);
        if (distance_to_tan_half_pole(lambda) < kExclusionTol) {
            std::ostringstream msg;
            msg << "theta eigenvalue " << lambda << " within " << kExclusionTol
                << " of an odd multiple of pi (pole of tan(theta/2))";
            throw ValidationError(msg.str());
        }
    }
}

CMatrix theta_to_tan_half(const ThetaMatrix& theta) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(theta.matrix());
    const Eigen::VectorXd mapped = eig.eigenvalues().unaryExpr([](double v) { return std::tan(0.5 * v); });
    CMatrix t = eig.eigenvectors() * mapped.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
    return 0.5 * (t + t.adjoint());
}

ThetaMatrix tan_half_to_theta(const CMatrix& tan_half) {
    if (tan_half.rows() == 0 || tan_half.rows() != tan_half.cols()) {
        throw ValidationError("tan(theta/2) must be a non-empty square matrix");
    }
    const double defect = hermiticity_defect(tan_half);
    if (defect > scaled_tol(tan_half)) {
        std::ostringstream msg;
        msg << "tan(theta/2) is not Hermitian: defect " << defect;
        throw ValidationError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (tan_half + tan_half.adjoint()));
    const Eigen::VectorXd mapped = eig.eigenvalues().unaryExpr([](double v) { return 2.0 * std::atan(v); });
    CMatrix theta = eig.eigenvectors() * mapped.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
    return ThetaMatrix(0.5 * (theta + theta.adjoint()));
}

Configuration::Configuration(std::vector<Vec3> xi, CMatrix tan_half_theta, bool half_space)
    : half_space_(half_space) {
    const auto n = xi.size();
    if (n == 0) throw ValidationError("configuration needs at least one scatterer");
    if (tan_half_theta.rows() != Eigen::Index(n) || tan_half_theta.cols() != Eigen::Index(n)) {
        std::ostringstream msg;
        msg << "tan_half_theta must be " << n << "x" << n << ", got " << tan_half_theta.rows() << "x"
            << tan_half_theta.cols();
        throw ValidationError(msg.str());
    }
    for (const auto& p : xi) {
        if (!p.allFinite()) throw ValidationError("scatterer position is not finite");
    }
    if (!tan_half_theta.allFinite()) throw ValidationError("tan_half_theta has non-finite entries");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lex_less(xi[a], xi[b]); });
    xi_.resize(n);
    tan_half_.resize(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        xi_[a] = xi[order[a]];
        for (std::size_t b = 0; b < n; ++b) tan_half_(a, b) = tan_half_theta(order[a], order[b]);
    }

    min_separation_ = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            min_separation_ = std::min(min_separation_, (xi_[a] - xi_[b]).norm());
        }
    }
    if (!(min_separation_ > 0.0)) throw ValidationError("scatterer positions must be pairwise distinct");

    const double tol = scaled_tol(tan_half_);
    const double defect = hermiticity_defect(tan_half_);
    hermitian_ok_ = defect <= tol;
    if (!hermitian_ok_) {
        std::ostringstream msg;
        msg << "tan_half_theta is not Hermitian: defect " << defect;
        throw ValidationError(msg.str());
    }
    symmetric_ = (tan_half_ - tan_half_.transpose()).norm() <= tol;
    real_ = tan_half_.imag().norm() <= tol;

    if (half_space_) {
        for (const auto& p : xi_) {
            if (!(p.z() < 0.0)) {
                std::ostringstream msg;
                msg << "half-space configuration requires xi_3 < 0, got " << p.z();
                throw ValidationError(msg.str());
            }
        }
    }
}

double Configuration::diameter() const {
    double d = 0.0;
    for (std::size_t a = 0; a < xi_.size(); ++a) {
        for (std::size_t b = a + 1; b < xi_.size(); ++b) d = std::max(d, (xi_[a] - xi_[b]).norm());
    }
    return d;
}

Configuration alpha_to_config(std::span<const double> alpha, std::vector<Vec3> xi, bool half_space) {
    const auto n = xi.size();
    if (alpha.size() != n) throw ValidationError("alpha and xi must have the same length");
    CMatrix t = CMatrix::Zero(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        t(j, j) = alpha[j] + kDiagShift;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) continue;
            const double r = (xi[j] - xi[l]).norm();
            if (r > 0.0) t(j, l) = -re_g0_at_i(r);
        }
    }
    return Configuration(std::move(xi), std::move(t), half_space);
}

CMatrix tan_half_offset(std::span<const Vec3> xi, const ComplexEnergy& z) {
    const auto n = xi.size();
    CMatrix d(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        d(j, j) = kI * z.root() / kFourPi + kDiagShift;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) continue;
            const double r = (xi[j] - xi[l]).norm();
            d(j, l) = g0_3d(z, r) - re_g0_at_i(r);
        }
    }
    return d;
}

CMatrix p_inverse(const Configuration& config, const ComplexEnergy& z) {
    return config.tan_half_theta() - tan_half_offset(config.xi(), z);
}

KreinMatrix krein_matrix(const Configuration& config, const ComplexEnergy& z) {
    CMatrix a = p_inverse(config, z);
    const auto n = a.rows();
    Eigen::PartialPivLU<CMatrix> lu(a);
    const cplx det = lu.determinant();
    CMatrix p = lu.inverse();
    const CMatrix identity = CMatrix::Identity(n, n);
    p += lu.solve(identity - a * p);

    auto one_norm = [](const CMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
    const double cond = one_norm(a) * one_norm(p);
    if (det == 0.0 || !p.allFinite() || !std::isfinite(cond) || cond > 1e12) {
        std::ostringstream msg;
        msg << "P^{-1}(z) is numerically singular at z = " << z.value() << " (det " << det
            << ", condition " << cond << ")";
        throw NearResonance(msg.str(), z.value(), det, cond);
    }
    return KreinMatrix{z, std::move(a), std::move(p), det, cond};
}

KreinMatrix krein_matrix_at_wavenumber(const Configuration& config, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("wavenumber k must be positive");
    return krein_matrix(config, ComplexEnergy::from_wavenumber(k));
}

PerturbedGreen::PerturbedGreen(const Configuration& config, const ComplexEnergy& z)
    : config_(config), krein_(krein_matrix(config, z)) {}

CVector PerturbedGreen::basis_at(const Vec3& x) const {
    const auto& xi = config_.xi();
    CVector a(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        const double r = (x - xi[j]).norm();
        if (r == 0.0) throw DomainError("evaluation point coincides with a scatterer");
        a(j) = g0_3d(krein_.z, r);
    }
    return a;
}

cplx PerturbedGreen::scattered(const Vec3& x, const Vec3& y) const {
    return basis_at(x).transpose() * krein_.p * basis_at(y);
}

cplx PerturbedGreen::operator()(const Vec3& x, const Vec3& y) const {
    const double r = (x - y).norm();
    if (r == 0.0) throw DomainError("perturbed_green requires x != y");
    return g0_3d(krein_.z, r) + scattered(x, y);
}

cplx perturbed_green(const Configuration& config, const ComplexEnergy& z, const Vec3& x, const Vec3& y) {
    return PerturbedGreen(config, z)(x, y);
}

CMatrix gamma_matrix(std::span<const double> alpha, std::span<const Vec3> xi, const ComplexEnergy& z) {
    const auto n = xi.size();
    if (alpha.size() != n) throw ValidationError("alpha and xi must have the same length");
    CMatrix gamma(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        gamma(j, j) = -kI * z.root() / kFourPi + alpha[j];
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) continue;
            const double r = (xi[j] - xi[l]).norm();
            gamma(j, l) = r > 0.0 ? -g0_3d(z, r) : cplx(0.0);
        }
    }
    return gamma;
}

cplx local_green(std::span<const double> alpha, std::span<const Vec3> xi, const ComplexEnergy& z,
                 const Vec3& x, const Vec3& y) {
    const CMatrix gamma_inv = gamma_matrix(alpha, xi, z).inverse();
    CVector ax(xi.size()), ay(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        ax(j) = g0_3d(z, (x - xi[j]).norm());
        ay(j) = g0_3d(z, (y - xi[j]).norm());
    }
    return g0_3d(z, (x - y).norm()) + cplx(ax.transpose() * gamma_inv * ay);
}

double krein_identity_residual(const Configuration& config, const ComplexEnergy& z1, const ComplexEnergy& z2) {
    const auto& xi = config.xi();
    const auto n = xi.size();
    const cplx w1 = z1.value() * z1.value() + 1.0;
    const cplx w2 = z2.value() * z2.value() + 1.0;
    const cplx dz = z1.value() - z2.value();
    // (z1 - z2) Gram = (z1 - z2) N + (z1² + 1) F(z1) - (z2² + 1) F(z2), from
    // (H² + 1) / ((H - z1)(H - z2)) = 1 + partial fractions.
    CMatrix scaled_gram(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        scaled_gram(j, j) = dz * basis_norm_sq() + w1 * gram_diag(z1) - w2 * gram_diag(z2);
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) continue;
            const double r = (xi[j] - xi[l]).norm();
            scaled_gram(j, l) = dz * basis_overlap(r) + w1 * gram_offdiag(z1, r) - w2 * gram_offdiag(z2, r);
        }
    }
    return (p_inverse(config, z1) - p_inverse(config, z2) + scaled_gram).norm();
}

double green_asymmetry(const KreinMatrix& krein) { return (krein.p - krein.p.transpose()).norm(); }

}  // namespace pscat
