#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pscat/errors.hpp"
#include "pscat/inverse.hpp"
#include "plane_index.hpp"

namespace pscat {

namespace {

using detail::PlaneIndex;

// a(u, j) = G0(k0², |x_u - ξ_j|) over the distinct plane points.
CMatrix basis_matrix(const PlaneIndex& index, const std::vector<Vec3>& xi) {
    const auto z = ComplexEnergy::from_wavenumber(index.k0);
    CMatrix a(index.points.size(), xi.size());
    for (std::size_t u = 0; u < index.points.size(); ++u) {
        for (std::size_t j = 0; j < xi.size(); ++j) a(u, j) = g0_3d(z, (index.points[u] - xi[j]).norm());
    }
    return a;
}

// Column j·n + j' holds a(x, j) a(y, j') for every pair.
CMatrix design_matrix(const PlaneIndex& index, const CMatrix& a) {
    const auto n = a.cols();
    CMatrix b(index.pair_count(), n * n);
    for (std::size_t m = 0; m < index.pair_count(); ++m) {
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index l = 0; l < n; ++l) b(m, j * n + l) = a(index.first[m], j) * a(index.second[m], l);
        }
    }
    return b;
}

CVector data_vector(const PlaneIndex& index) {
    return Eigen::Map<const CVector>(index.scattered.data(), Eigen::Index(index.scattered.size()));
}

struct LinearFit {
    CMatrix basis;
    CMatrix p;
    CVector residual;
    CMatrix q;  // orthonormal basis of range(B)
};

LinearFit linear_fit(const PlaneIndex& index, const std::vector<Vec3>& xi) {
    const auto n = Eigen::Index(xi.size());
    LinearFit fit;
    fit.basis = basis_matrix(index, xi);
    const CMatrix b = design_matrix(index, fit.basis);
    Eigen::ColPivHouseholderQR<CMatrix> qr(b);
    qr.setThreshold(1e-12);
    if (qr.rank() < n * n) {
        std::ostringstream msg;
        msg << "linear stage is rank deficient (rank " << qr.rank() << " of " << n * n
            << "); undetermined P entries:";
        for (Eigen::Index c = qr.rank(); c < n * n; ++c) {
            const auto col = qr.colsPermutation().indices()(c);
            msg << " (" << col / n << ", " << col % n << ")";
        }
        throw RankDeficient(msg.str());
    }
    const CVector d = data_vector(index);
    const CVector p = qr.solve(d);
    fit.p = CMatrix(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index l = 0; l < n; ++l) fit.p(j, l) = p(j * n + l);
    }
    fit.residual = d - b * p;
    fit.q = qr.householderQ() * CMatrix::Identity(b.rows(), n * n);
    return fit;
}

double rms(const CVector& r) { return r.size() ? std::sqrt(r.squaredNorm() / double(r.size())) : 0.0; }

// Kaufman's approximation to the Jacobian of the projected residual (I - QQ*)(d - B(Ξ) P̂).
Eigen::MatrixXd projected_jacobian(const PlaneIndex& index, const std::vector<Vec3>& xi, const LinearFit& fit) {
    const auto z = ComplexEnergy::from_wavenumber(index.k0);
    const auto n = Eigen::Index(xi.size());
    const auto points = Eigen::Index(index.points.size());
    const CMatrix& a = fit.basis;
    // q(u, j) = Σ_l P_jl a(u, l) and t(u, j) = Σ_l a(u, l) P_lj.
    const CMatrix q = a * fit.p.transpose();
    const CMatrix t = a * fit.p;
    const auto m = Eigen::Index(index.pair_count());
    Eigen::MatrixXd jac(2 * m, 3 * n);
    CMatrix da(points, 3);
    CVector column(m);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index u = 0; u < points; ++u) {
            const Vec3 d = xi[j] - index.points[u];
            const double r = d.norm();
            const cplx g = g0_3d_dr(z, r);
            for (int c = 0; c < 3; ++c) da(u, c) = g * d(c) / r;
        }
        for (int c = 0; c < 3; ++c) {
            for (Eigen::Index k = 0; k < m; ++k) {
                const int f = index.first[k], s = index.second[k];
                column(k) = da(f, c) * q(s, j) + t(f, j) * da(s, c);
            }
            column -= fit.q * (fit.q.adjoint() * column).eval();
            jac.col(3 * j + c).head(m) = -column.real();
            jac.col(3 * j + c).tail(m) = -column.imag();
        }
    }
    return jac;
}

bool admissible(const std::vector<Vec3>& xi, double min_gap) {
    for (std::size_t j = 0; j < xi.size(); ++j) {
        if (!(xi[j].z() < 0.0) || !xi[j].allFinite()) return false;
        for (std::size_t l = 0; l < j; ++l) {
            if ((xi[j] - xi[l]).norm() < min_gap) return false;
        }
    }
    return true;
}

struct LmOutcome {
    std::vector<Vec3> xi;
    LinearFit fit;
    int iterations = 0;
    bool converged = false;
};

LmOutcome levenberg_marquardt(const PlaneIndex& index, std::vector<Vec3> xi, const FitOptions& options) {
    const double wavelength = 2.0 * kPi / index.k0;
    const double min_gap = 1e-6 * wavelength;
    LmOutcome out;
    out.fit = linear_fit(index, xi);
    double cost = out.fit.residual.squaredNorm();
    double mu = 1e-3;
    const auto params = Eigen::Index(3 * xi.size());

    while (out.iterations < options.max_iterations) {
        ++out.iterations;
        if (cost == 0.0) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jac = projected_jacobian(index, xi, out.fit);
        const auto m = out.fit.residual.size();
        Eigen::VectorXd r(2 * m);
        r.head(m) = out.fit.residual.real();
        r.tail(m) = out.fit.residual.imag();
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        const Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-300);

        bool accepted = false;
        while (mu < 1e16) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += mu * scale;
            const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
            std::vector<Vec3> trial = xi;
            for (Eigen::Index k = 0; k < params; ++k) trial[k / 3](k % 3) += step(k);
            if (admissible(trial, min_gap)) {
                try {
                    LinearFit trial_fit = linear_fit(index, trial);
                    const double trial_cost = trial_fit.residual.squaredNorm();
                    if (trial_cost < cost) {
                        const double old_rms = std::sqrt(cost), new_rms = std::sqrt(trial_cost);
                        xi = std::move(trial);
                        out.fit = std::move(trial_fit);
                        cost = trial_cost;
                        mu = std::max(mu / 3.0, 1e-12);
                        accepted = true;
                        if ((old_rms - new_rms) <= options.relative_tolerance * old_rms) out.converged = true;
                        break;
                    }
                } catch (const RankDeficient&) {
                }
            }
            mu *= 10.0;
        }
        // No downhill step at any damping: Ξ is stationary to working precision.
        if (!accepted) out.converged = true;
        if (out.converged) break;
    }
    out.xi = std::move(xi);
    return out;
}

void check_fit_inputs(const PlaneSamples& samples, const std::vector<Vec3>& xi) {
    if (xi.empty()) throw ValidationError("fit_model: at least one initial position is required");
    for (const auto& p : xi) {
        if (!(p.z() < 0.0)) throw DomainError("fit_model: initial positions must lie below the plane");
    }
    const std::size_t n = xi.size();
    const std::size_t floor = 2 * (3 * n + n * n);
    if (samples.pairs.size() < floor) {
        std::ostringstream msg;
        msg << "fit_model: " << samples.pairs.size() << " samples below the identifiability floor " << floor
            << " for order " << n;
        throw ValidationError(msg.str());
    }
}

}  // namespace

CMatrix solve_linear_stage(const PlaneSamples& samples, const std::vector<Vec3>& xi) {
    if (xi.empty()) throw ValidationError("solve_linear_stage: empty Ξ");
    return linear_fit(detail::index_samples(samples), xi).p;
}

CMatrix extract_tan_half(const CMatrix& p, const std::vector<Vec3>& xi, double k0) {
    if (p.rows() != Eigen::Index(xi.size()) || p.cols() != p.rows()) {
        throw ValidationError("extract_tan_half: P and Ξ sizes differ");
    }
    Eigen::FullPivLU<CMatrix> lu(p);
    if (!lu.isInvertible()) throw RankDeficient("extract_tan_half: P is singular");
    return lu.inverse() + tan_half_offset(xi, ComplexEnergy::from_wavenumber(k0));
}

namespace detail {

std::vector<cplx> model_residual(const PlaneIndex& index, const std::vector<Vec3>& xi, const CMatrix& p) {
    std::vector<cplx> r = index.scattered;
    if (!xi.empty()) {
        const CMatrix a = basis_matrix(index, xi);
        for (std::size_t m = 0; m < index.pair_count(); ++m) {
            r[m] -= (a.row(index.first[m]) * p * a.row(index.second[m]).transpose())(0, 0);
        }
    }
    return r;
}

}  // namespace detail

double model_residual_rms(const PlaneSamples& samples, const std::vector<Vec3>& xi, const CMatrix& p) {
    const auto r = detail::model_residual(detail::index_samples(samples), xi, p);
    return rms(Eigen::Map<const CVector>(r.data(), Eigen::Index(r.size())));
}

ReconstructionResult fit_model(const PlaneSamples& samples, const std::vector<Vec3>& initial_xi,
                               const FitOptions& options) {
    check_fit_inputs(samples, initial_xi);
    const auto index = detail::index_samples(samples);
    auto lm = levenberg_marquardt(index, initial_xi, options);

    const auto n = Eigen::Index(lm.xi.size());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lex_less(lm.xi[a], lm.xi[b]); });

    ReconstructionResult result;
    result.p_hat = CMatrix(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        result.xi_hat.push_back(lm.xi[order[j]]);
        for (Eigen::Index l = 0; l < n; ++l) result.p_hat(j, l) = lm.fit.p(order[j], order[l]);
    }
    const CMatrix raw = extract_tan_half(result.p_hat, result.xi_hat, samples.k0);
    result.hermiticity_defect = hermiticity_defect(raw);
    result.tan_half_hat = 0.5 * (raw + raw.adjoint());
    try {
        result.theta_hat = tan_half_to_theta(result.tan_half_hat);
    } catch (const ValidationError& e) {
        result.diagnostics.push_back(std::string("theta not reported: ") + e.what());
    }
    result.residual_rms = rms(lm.fit.residual);
    result.model_order = int(n);
    result.iterations = lm.iterations;
    result.converged = lm.converged;
    if (!lm.converged) {
        std::ostringstream msg;
        msg << "fit did not converge in " << lm.iterations << " iterations; residual_rms " << result.residual_rms;
        result.diagnostics.push_back(msg.str());
    }
    return result;
}

}  // namespace pscat
