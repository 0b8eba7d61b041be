#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>
#include <sstream>

#include "pscat/errors.hpp"
#include "pscat/inverse.hpp"

namespace pscat {

LiftSpec LiftSpec::defaults(double k0) { return LiftSpec{60.0 / k0, kPi / (8.0 * k0), 20.0 / k0}; }

void LiftSpec::validate(double k0) const {
    std::ostringstream msg;
    if (!(radius >= 10.0 / k0 * (1.0 - 1e-12))) {
        msg << "lift radius " << radius << " below 10/k0 = " << 10.0 / k0;
    } else if (!(grid_step > 0.0) || grid_step > kPi / (4.0 * k0) * (1.0 + 1e-12)) {
        msg << "lift grid step " << grid_step << " outside (0, pi/(4 k0)] = (0, " << kPi / (4.0 * k0) << "]";
    } else if (!(taper_width >= 0.0) || taper_width > radius) {
        msg << "taper width " << taper_width << " outside [0, R]";
    } else {
        return;
    }
    throw ValidationError(msg.str());
}

namespace {

// Plane data G(σ, y) for one fixed y, addressed on the lattice the samples live on.
std::vector<const PlanePair*> pairs_with_second(const PlaneSamples& samples, const Point2& y) {
    std::vector<const PlanePair*> hits;
    const double tol = 1e-9 * std::max(1.0, y.norm());
    for (const auto& p : samples.pairs) {
        if ((p.y - y).norm() <= tol) hits.push_back(&p);
    }
    return hits;
}

class SliceLattice {
public:
    SliceLattice(const std::vector<const PlanePair*>& hits, const Point2& y) : y_(y) {
        if (hits.size() < 4) {
            std::ostringstream msg;
            msg << "no plane data with second argument y = (" << y.x() << ", " << y.y() << ")";
            throw CoverageError(msg.str());
        }
        origin_ = hits.front()->x;
        for (const auto* p : hits) origin_ = origin_.cwiseMin(p->x);
        step_ = std::numeric_limits<double>::infinity();
        for (int axis = 0; axis < 2; ++axis) {
            std::vector<double> c;
            for (const auto* p : hits) c.push_back(p->x(axis));
            std::sort(c.begin(), c.end());
            for (std::size_t i = 1; i < c.size(); ++i) {
                const double d = c[i] - c[i - 1];
                if (d > 1e-12 * std::max(1.0, std::abs(c[i]))) step_ = std::min(step_, d);
            }
        }
        if (!std::isfinite(step_)) throw CoverageError("plane data for the lift is not a 2D lattice");
        for (const auto* p : hits) {
            const Eigen::Vector2d f = (p->x - origin_) / step_;
            const long i = std::lround(f.x()), j = std::lround(f.y());
            if (std::abs(f.x() - double(i)) > 1e-6 || std::abs(f.y() - double(j)) > 1e-6) {
                throw CoverageError("plane data for the lift is not on a regular lattice");
            }
            values_[{i, j}] = p->g;
        }
    }

    double step() const { return step_; }

    // Nearest lattice sample to σ, or nullopt when it is absent.
    std::optional<cplx> lookup(const Point2& sigma) const {
        const Eigen::Vector2d f = (sigma - origin_) / step_;
        auto it = values_.find({std::lround(f.x()), std::lround(f.y())});
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    // Lattice neighbours of y, used to fill the scattered part at σ = y.
    std::optional<cplx> scattered_at_source(double k0) const {
        const auto z = ComplexEnergy::from_wavenumber(k0);
        cplx sum = 0.0;
        const Point2 offsets[4] = {{step_, 0.0}, {-step_, 0.0}, {0.0, step_}, {0.0, -step_}};
        for (const auto& o : offsets) {
            auto v = lookup(y_ + o);
            if (!v) return std::nullopt;
            sum += *v - g0_3d(z, step_);
        }
        return 0.25 * sum;
    }

private:
    Point2 y_;
    Point2 origin_;
    double step_ = 0.0;
    std::map<std::pair<long, long>, cplx> values_;
};

double taper_weight(double rho, const LiftSpec& spec) {
    const double inner = spec.radius - spec.taper_width;
    if (rho <= inner) return 1.0;
    if (rho > spec.radius) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (rho - inner) / spec.taper_width));
}

// 2 ∂/∂σ3 G0(k0², (σ, σ3) - s) at σ3 = 0, the normal derivative of the image-difference kernel.
cplx poisson_kernel(const ComplexEnergy& z, const Point2& sigma, const Vec3& s) {
    const double r = (on_plane(sigma) - s).norm();
    return -2.0 * s.z() / r * g0_3d_dr(z, r);
}

// Σ_σ [G(σ, y) - G0(σ - y)] K(σ, s) taper h² over the lattice disk around s.
cplx lift_scattered(const SliceLattice& slice, const PlaneSamples& samples, const LiftSpec& spec, const Vec3& s,
                    const Point2& y) {
    if (spec.grid_step < slice.step() * (1.0 - 1e-9)) {
        std::ostringstream msg;
        msg << "plane data step " << slice.step() << " is coarser than the lift step " << spec.grid_step;
        throw CoverageError(msg.str());
    }
    const auto z = ComplexEnergy::from_wavenumber(samples.k0);
    const double h = spec.grid_step;
    const Point2 center(s.x(), s.y());
    const long reach = long(std::ceil(spec.radius / h));
    // Nodes on the lattice through y so the singular point is a node.
    const Eigen::Vector2d shift = (center - y) / h;
    const long ci = std::lround(shift.x()), cj = std::lround(shift.y());

    cplx sum = 0.0;
    Point2 missing_lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    Point2 missing_hi = -missing_lo;
    bool missing = false;
    for (long i = ci - reach; i <= ci + reach; ++i) {
        for (long j = cj - reach; j <= cj + reach; ++j) {
            const Point2 sigma = y + h * Point2(double(i), double(j));
            const double weight = taper_weight((sigma - center).norm(), spec);
            if (weight == 0.0) continue;
            cplx scattered;
            if (i == 0 && j == 0) {
                auto v = slice.scattered_at_source(samples.k0);
                if (!v) {
                    missing = true;
                    missing_lo = missing_lo.cwiseMin(sigma);
                    missing_hi = missing_hi.cwiseMax(sigma);
                    continue;
                }
                scattered = *v;
            } else {
                auto v = slice.lookup(sigma);
                if (!v) {
                    missing = true;
                    missing_lo = missing_lo.cwiseMin(sigma);
                    missing_hi = missing_hi.cwiseMax(sigma);
                    continue;
                }
                scattered = *v - g0_3d(z, (sigma - y).norm());
            }
            sum += weight * scattered * poisson_kernel(z, sigma, s);
        }
    }
    if (missing) {
        std::ostringstream msg;
        msg << "plane data does not cover the lift disk: missing nodes in [" << missing_lo.x() << ", "
            << missing_hi.x() << "] x [" << missing_lo.y() << ", " << missing_hi.y() << "]";
        throw CoverageError(msg.str());
    }
    return sum * h * h;
}

}  // namespace

cplx lift_to_halfspace(const PlaneSamples& samples, const LiftSpec& spec, const Vec3& s, const Point2& y) {
    if (!(s.z() > 0.0)) throw DomainError("lift_to_halfspace: s must lie strictly above the plane");
    spec.validate(samples.k0);
    const SliceLattice slice(pairs_with_second(samples, y), y);
    const auto z = ComplexEnergy::from_wavenumber(samples.k0);
    return g0_3d(z, (s - on_plane(y)).norm()) + lift_scattered(slice, samples, spec, s, y);
}

cplx lift_pair(const PlaneSamples& samples, const LiftSpec& spec, const Vec3& s, const Vec3& t) {
    if (!(s.z() > 0.0) || !(t.z() > 0.0)) throw DomainError("lift_pair: s and t must lie above the plane");
    spec.validate(samples.k0);
    const auto z = ComplexEnergy::from_wavenumber(samples.k0);

    std::map<std::pair<double, double>, std::vector<const PlanePair*>> by_second;
    for (const auto& p : samples.pairs) by_second[{p.y.x(), p.y.y()}].push_back(&p);
    if (by_second.empty()) throw CoverageError("lift_pair: no plane data");

    // Outer nodes sit on the data lattice through the sample point closest to s.
    const Point2 center(s.x(), s.y());
    Point2 anchor = Point2(by_second.begin()->first.first, by_second.begin()->first.second);
    for (const auto& [key, _] : by_second) {
        const Point2 q(key.first, key.second);
        if ((q - center).norm() < (anchor - center).norm()) anchor = q;
    }
    const double h = spec.grid_step;
    const double match_tol = 1e-6 * h;
    auto find_slice = [&](const Point2& sigma) -> const std::vector<const PlanePair*>* {
        auto it = by_second.lower_bound({sigma.x() - match_tol, -std::numeric_limits<double>::infinity()});
        for (; it != by_second.end() && it->first.first <= sigma.x() + match_tol; ++it) {
            if (std::abs(it->first.second - sigma.y()) <= match_tol) return &it->second;
        }
        return nullptr;
    };

    const Eigen::Vector2d shift = (center - anchor) / h;
    const long ci = std::lround(shift.x()), cj = std::lround(shift.y());
    const long reach = long(std::ceil(spec.radius / h));
    cplx sum = 0.0;
    for (long i = ci - reach; i <= ci + reach; ++i) {
        for (long j = cj - reach; j <= cj + reach; ++j) {
            const Point2 sigma = anchor + h * Point2(double(i), double(j));
            const double weight = taper_weight((sigma - center).norm(), spec);
            if (weight == 0.0) continue;
            const auto* hits = find_slice(sigma);
            if (hits == nullptr) {
                std::ostringstream msg;
                msg << "lift_pair: no plane data with second argument (" << sigma.x() << ", " << sigma.y() << ")";
                throw CoverageError(msg.str());
            }
            // G(σ, t) - G0(σ - t) = G(t, σ) - G0(t - σ): the first-pass scattered lift.
            const SliceLattice slice(*hits, sigma);
            sum += weight * lift_scattered(slice, samples, spec, t, sigma) * poisson_kernel(z, sigma, s);
        }
    }
    return g0_3d(z, (s - t).norm()) + sum * h * h;
}

}  // namespace pscat
