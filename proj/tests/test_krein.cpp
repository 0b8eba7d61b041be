#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pscat/errors.hpp"
#include "pscat/krein.hpp"
#include "pscat/random.hpp"
#include "test_support.hpp"

using namespace pscat;
using namespace pscat::testing;

namespace {

const double kDiag = 1.0 / (kFourPi * std::sqrt(2.0));

ComplexEnergy random_energy(Rng& rng) {
    // Avoid the positive half-line where P^{-1} is only a boundary value.
    return ComplexEnergy(cplx(rng.uniform(-6, 6), rng.uniform(0.1, 6) * (rng.uniform() < 0.5 ? -1 : 1)));
}

// (Δ + z) G(·, y) at x with a fourth-order difference stencil.
cplx helmholtz_residual(const PerturbedGreen& g, const Vec3& x, const Vec3& y, double h) {
    const cplx z = g.krein().z.value();
    cplx lap = 0.0;
    for (int c = 0; c < 3; ++c) {
        Vec3 e = Vec3::Zero();
        e(c) = h;
        lap += (-g(x + 2 * e, y) + 16.0 * g(x + e, y) - 30.0 * g(x, y) + 16.0 * g(x - e, y) - g(x - 2 * e, y)) /
               (12.0 * h * h);
    }
    return lap + z * g(x, y);
}

}  // namespace

TEST_SUITE("krein") {

TEST_CASE("ThetaMatrix validation") {
    CMatrix t(2, 2);
    t << 0.3, cplx(0.1, 0.2), cplx(0.1, -0.2), -0.5;
    CHECK_NOTHROW(ThetaMatrix{t});
    CMatrix bad = t;
    bad(0, 1) += 1e-6;
    CHECK_THROWS_AS(ThetaMatrix{bad}, ValidationError);
    CMatrix pole = CMatrix::Zero(1, 1);
    pole(0, 0) = kPi + 1e-11;
    CHECK_THROWS_AS(ThetaMatrix{pole}, ValidationError);
    pole(0, 0) = -3.0 * kPi;
    CHECK_THROWS_AS(ThetaMatrix{pole}, ValidationError);
    pole(0, 0) = kPi + 1e-6;
    CHECK_NOTHROW(ThetaMatrix{pole});
    CHECK_THROWS_AS(ThetaMatrix{CMatrix(0, 0)}, ValidationError);
}

TEST_CASE("tan(theta/2) conversion is the scalar map on eigenvalues") {
    CMatrix t = CMatrix::Zero(1, 1);
    t(0, 0) = 1.2;
    CHECK(std::abs(theta_to_tan_half(ThetaMatrix(t))(0, 0) - std::tan(0.6)) < 1e-15);
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + trial % 4;
        // θ = U diag(λ) U* with λ in (-π, π).
        const CMatrix h = random_hermitian(rng, n, 1.0);
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
        Eigen::VectorXd lambda(n);
        for (std::size_t i = 0; i < n; ++i) lambda(i) = rng.uniform(-3.0, 3.0);
        const CMatrix theta = eig.eigenvectors() * lambda.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
        const ThetaMatrix tm(0.5 * (theta + theta.adjoint()));
        const CMatrix tan_half = theta_to_tan_half(tm);
        CHECK(hermiticity_defect(tan_half) < 1e-13 * (1.0 + tan_half.norm()));
        const ThetaMatrix back = tan_half_to_theta(tan_half);
        CHECK((back.matrix() - tm.matrix()).norm() < 1e-10 * (1.0 + tm.matrix().norm()));
    }
}

TEST_CASE("Configuration canonicalizes order and validates invariants") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + trial % 3;
        auto xi = random_points(rng, n, 2.0, 0.3);
        const CMatrix t = random_hermitian(rng, n, 0.5);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        std::vector<Vec3> xi_p;
        CMatrix t_p(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            xi_p.push_back(xi[perm[j]]);
            for (std::size_t l = 0; l < n; ++l) t_p(j, l) = t(perm[j], perm[l]);
        }
        const Configuration a(xi, t), b(xi_p, t_p);
        for (std::size_t j = 0; j < n; ++j) CHECK(a.xi()[j] == b.xi()[j]);
        CHECK((a.tan_half_theta() - b.tan_half_theta()).norm() == 0.0);
        for (std::size_t j = 1; j < n; ++j) CHECK(lex_less(a.xi()[j - 1], a.xi()[j]));
    }
    CMatrix t = CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(Configuration({Vec3(0, 0, -1), Vec3(0, 0, -1)}, t), ValidationError);
    CHECK_THROWS_AS(Configuration({}, CMatrix(0, 0)), ValidationError);
    CHECK_THROWS_AS(Configuration({Vec3(0, 0, 1)}, CMatrix::Identity(1, 1), true), ValidationError);
    CMatrix nh = t;
    nh(0, 1) = cplx(0.0, 0.3);
    CHECK_THROWS_AS(Configuration({Vec3(0, 0, -1), Vec3(1, 0, -1)}, nh), ValidationError);
    nh(1, 0) = cplx(0.0, -0.3);
    const Configuration herm({Vec3(0, 0, -1), Vec3(1, 0, -1)}, nh);
    CHECK(herm.hermitian_ok());
    CHECK_FALSE(herm.symmetric());
    CHECK_FALSE(herm.real());
    const Configuration sym({Vec3(0, 0, -1), Vec3(1, 0, -1)}, t);
    CHECK(sym.symmetric());
    CHECK(sym.real());
    CHECK(std::abs(sym.min_separation() - 1.0) < 1e-15);
}

TEST_CASE("alpha_to_config on one point") {
    const double alpha[] = {0.5};
    const auto c = alpha_to_config(alpha, {Vec3(0, 0, -1)});
    CHECK(std::abs(c.tan_half_theta()(0, 0) - (0.5 + kDiag)) < 1e-15);
}

TEST_CASE("P^{-1} differences equal the Gram matrix of the deficiency basis") {
    // Independent route: P^{-1}(z1) - P^{-1}(z2) = -(z1 - z2) (u_j(z̄1), u_j'(z2)).
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const auto config = random_config(rng, 1 + trial % 4, 3.0, 0.4);
        const auto z1 = random_energy(rng), z2 = random_energy(rng);
        const CMatrix lhs = p_inverse(config, z1) - p_inverse(config, z2);
        const auto n = config.size();
        CMatrix gram(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t l = 0; l < n; ++l) {
                gram(j, l) = basis_inner(z1, z2, (config.xi()[j] - config.xi()[l]).norm());
            }
        }
        const CMatrix rhs = -(z1.value() - z2.value()) * gram;
        CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
        CHECK(krein_identity_residual(config, z1, z2) < 1e-11);
        CHECK(krein_identity_residual(config, z1, z1) == 0.0);
    }
}

TEST_CASE("the resolvent is self-adjoint: G(conj z, x, y) = conj G(z, y, x)") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto config = random_config(rng, 1 + trial % 3, 2.0, 0.3);
        const auto z = random_energy(rng);
        const ComplexEnergy zbar(std::conj(z.value()));
        const Vec3 x(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(2, 3));
        const Vec3 y(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, -2));
        const cplx a = perturbed_green(config, zbar, x, y);
        const cplx b = std::conj(perturbed_green(config, z, y, x));
        CHECK(rel_err(a, b) < 1e-11);
    }
}

TEST_CASE("perturbed Green's function obeys the point boundary condition") {
    // Near ξ_j, G(x, y) = a_j / (4π|x - ξ_j|) + b_j + O(|x - ξ_j|) with b = B a and
    // B = T - (4π√2)^{-1} + [Re G0(i, |ξ_j - ξ_j'|)]_{j != j'}, independent of z.
    Rng rng(19);
    for (int trial = 0; trial < 12; ++trial) {
        const auto config = random_config(rng, 1 + trial % 3, 3.0, 0.5);
        const auto n = config.size();
        CMatrix b_mat = config.tan_half_theta() - kDiag * CMatrix::Identity(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t l = 0; l < n; ++l) {
                if (j != l) b_mat(j, l) += re_g0(ComplexEnergy(kI), (config.xi()[j] - config.xi()[l]).norm());
            }
        }
        const auto z = random_energy(rng);
        const PerturbedGreen g(config, z);
        const Vec3 y(0.7, -0.2, 4.0);
        const Vec3 dir = Vec3(0.3, -0.5, 0.81).normalized();
        CVector a(n), b(n);
        for (std::size_t j = 0; j < n; ++j) {
            // Richardson in ρ on ρ G = a/(4π) + b ρ + c ρ² + ...
            const double rho = 1e-4;
            auto f = [&](double r) { return r * g(config.xi()[j] + r * dir, y); };
            const cplx b1 = (f(2 * rho) - f(rho)) / rho;
            const cplx b2 = (f(4 * rho) - f(2 * rho)) / (2 * rho);
            b(j) = 2.0 * b1 - b2;
            a(j) = kFourPi * (f(rho) - rho * b(j));
        }
        CHECK((b - b_mat * a).norm() < 1e-5 * (1.0 + b.norm()));
    }
}

TEST_CASE("perturbed Green's function solves Helmholtz away from the singularities") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto config = random_config(rng, 2, 2.0, 0.3);
        const PerturbedGreen g(config, ComplexEnergy(cplx(1.5, 0.3)));
        const Vec3 x(rng.uniform(-1, 1), rng.uniform(-1, 1), 3.0);
        const Vec3 y(rng.uniform(-1, 1), rng.uniform(-1, 1), -3.0);
        CHECK(std::abs(helmholtz_residual(g, x, y, 1e-2)) < 1e-6 * std::abs(g(x, y)));
    }
}

TEST_CASE("local interactions: Gamma^{-1} route equals the Krein route") {
    Rng rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const auto xi = random_points(rng, n, 1.5, 0.3);
        std::vector<double> alpha(n);
        for (auto& a : alpha) a = rng.uniform(-0.2, 0.5);
        const auto config = alpha_to_config(alpha, xi);
        const auto z = random_energy(rng);
        const Vec3 x(1.0, 2.0, 3.0), y(-2.0, 0.5, -1.0);
        CHECK(rel_err(perturbed_green(config, z, x, y), local_green(alpha, xi, z, x, y)) < 1e-12);
    }
}

TEST_CASE("one point with alpha < 0 has a bound state at -(4 pi alpha)^2") {
    const double alpha[] = {-0.05};
    const auto config = alpha_to_config(alpha, {Vec3(0, 0, 0)});
    const double kappa = -kFourPi * alpha[0];
    // det P^{-1}(-E) = α + √E/(4π) changes sign at E = κ².
    auto det = [&](double e) { return p_inverse(config, ComplexEnergy(cplx(-e, 0.0)))(0, 0).real(); };
    double lo = 1e-6, hi = 10.0;
    CHECK(det(lo) * det(hi) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (det(lo) * det(mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(std::abs(lo - kappa * kappa) < 1e-12);
    CHECK_THROWS_AS(krein_matrix(config, ComplexEnergy(cplx(-kappa * kappa, 0.0))), NearResonance);
    CHECK_NOTHROW(krein_matrix(config, ComplexEnergy(cplx(-kappa * kappa * 1.1, 0.0))));
}

TEST_CASE("krein_matrix inverts P^{-1}") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto config = random_config(rng, 1 + trial % 4, 2.0, 0.5);
        const auto km = krein_matrix(config, random_energy(rng));
        const auto n = config.size();
        CHECK((km.p * km.p_inverse - CMatrix::Identity(n, n)).norm() < 1e-12);
        CHECK(std::abs(km.det_p_inverse - km.p_inverse.determinant()) < 1e-10 * std::abs(km.det_p_inverse));
    }
}

TEST_CASE("green_asymmetry vanishes exactly for symmetric T") {
    Rng rng(37);
    const auto xi = random_points(rng, 3, 1.0, 0.3);
    const Configuration sym(xi, random_real_symmetric(rng, 3, 0.3));
    CHECK(green_asymmetry(krein_matrix(sym, ComplexEnergy(cplx(1.0, 0.5)))) < 1e-14);
    CMatrix t = random_real_symmetric(rng, 3, 0.3);
    t(0, 1) += cplx(0.0, 0.2);
    t(1, 0) -= cplx(0.0, 0.2);
    const Configuration herm(xi, t);
    CHECK(green_asymmetry(krein_matrix(herm, ComplexEnergy(cplx(1.0, 0.5)))) > 1e-3);
}

TEST_CASE("PerturbedGreen rejects coincident points") {
    const auto config = alpha_to_config(std::vector<double>{0.1}, {Vec3(0, 0, -1)});
    const PerturbedGreen g(config, ComplexEnergy(kI));
    CHECK_THROWS_AS(g(Vec3(1, 1, 1), Vec3(1, 1, 1)), DomainError);
    CHECK_THROWS_AS(g(Vec3(0, 0, -1), Vec3(1, 1, 1)), DomainError);
}

}  // TEST_SUITE
