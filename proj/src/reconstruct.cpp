#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>
#include <sstream>

#include "pscat/errors.hpp"
#include "pscat/inverse.hpp"
#include "plane_index.hpp"

namespace pscat {

namespace {

double rms_of(const std::vector<cplx>& r) {
    double sum = 0.0;
    for (const auto& v : r) sum += std::norm(v);
    return r.empty() ? 0.0 : std::sqrt(sum / double(r.size()));
}

double closest_pair(const std::vector<Vec3>& xi, std::size_t* a, std::size_t* b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < xi.size(); ++j) {
        for (std::size_t l = 0; l < j; ++l) {
            const double d = (xi[j] - xi[l]).norm();
            if (d < best) {
                best = d;
                *a = l;
                *b = j;
            }
        }
    }
    return best;
}

std::string format_point(const Vec3& p) {
    std::ostringstream s;
    s << "(" << p.x() << ", " << p.y() << ", " << p.z() << ")";
    return s.str();
}

ReconstructionResult empty_result(double rms, std::string why) {
    ReconstructionResult r;
    r.residual_rms = rms;
    r.model_order = 0;
    r.diagnostics.push_back(std::move(why));
    return r;
}

}  // namespace

ReconstructionResult reconstruct(const PlaneSamples& samples, const Box& search_box, const ReconstructOptions& options) {
    samples.validate();
    const double lambda = samples.wavelength();
    const double separation = 0.5 * lambda;
    const double step = options.grid_step > 0.0 ? options.grid_step : 0.25 * lambda;
    for (int c = 0; c < 3; ++c) {
        if (!(search_box.lo(c) <= search_box.hi(c))) throw DomainError("reconstruct: empty search box");
    }
    if (!(search_box.hi.z() < 0.0)) throw DomainError("reconstruct: search box must lie strictly below the plane");
    if (options.max_order < 1) throw ValidationError("reconstruct: max_order must be at least 1");

    const auto index = detail::index_samples(samples);
    int dims[3];
    const auto lattice = detail::box_lattice(search_box, step, dims);
    const double median = median_abs(samples);
    // Residual level of a correct model: complex noise has rms √2 σ.
    const double rms_floor = 1.5 * std::sqrt(2.0) * samples.noise_sigma + 1e-9 * median;
    const double ind_floor = indicator_floor(samples);

    std::vector<cplx> residual = index.scattered;
    const double rms0 = rms_of(residual);
    if (rms0 <= rms_floor) {
        return empty_result(rms0, "scattered field is at the noise floor; no scatterers detected");
    }

    // fits[m - 1] is the best order-m fit; the loop runs until the floor, a merge or max_order.
    std::vector<ReconstructionResult> fits;
    std::vector<std::string> notes;
    for (int order = 1; order <= options.max_order; ++order) {
        const std::vector<Vec3> current = fits.empty() ? std::vector<Vec3>{} : fits.back().xi_hat;
        const auto values = detail::indicator_on(index, residual, lattice, options.threads);
        auto peaks = detail::pick_peaks(lattice, dims, values, ind_floor, separation,
                                        options.candidates_per_order + int(current.size()));
        std::vector<Candidate> candidates;
        for (const auto& peak : peaks) {
            const bool clear = std::all_of(current.begin(), current.end(), [&](const Vec3& x) {
                return (x - peak.position).norm() >= separation;
            });
            if (clear && int(candidates.size()) < options.candidates_per_order) candidates.push_back(peak);
        }
        if (candidates.empty()) {
            notes.push_back("order " + std::to_string(order) + ": no indicator peak above the noise floor");
            break;
        }

        std::optional<ReconstructionResult> trial_best;
        for (const auto& candidate : candidates) {
            std::vector<Vec3> start = current;
            start.push_back(candidate.position);
            try {
                auto fit = fit_model(samples, start, options.fit);
                if (!trial_best || fit.residual_rms < trial_best->residual_rms) trial_best = std::move(fit);
            } catch (const RankDeficient& e) {
                notes.push_back("order " + std::to_string(order) + ": " + e.what());
            } catch (const ValidationError& e) {
                notes.push_back("order " + std::to_string(order) + ": " + e.what());
            }
        }
        if (!trial_best) break;

        std::size_t a = 0, b = 0;
        if (order > 1 && closest_pair(trial_best->xi_hat, &a, &b) < separation) {
            notes.push_back("order " + std::to_string(order) + ": merged candidates " +
                            format_point(trial_best->xi_hat[a]) + " and " + format_point(trial_best->xi_hat[b]) +
                            " closer than lambda/2");
            break;
        }
        fits.push_back(std::move(*trial_best));
        if (fits.back().residual_rms <= rms_floor) break;
        residual = detail::model_residual(index, fits.back().xi_hat, fits.back().p_hat);
    }

    // Smallest order at the floor; otherwise the smallest order that no higher order beats by 10x.
    std::vector<double> rms(fits.size() + 1, rms0);
    for (std::size_t m = 0; m < fits.size(); ++m) rms[m + 1] = fits[m].residual_rms;
    std::size_t chosen = rms.size() - 1;
    for (std::size_t m = 0; m < rms.size(); ++m) {
        if (rms[m] <= rms_floor) {
            chosen = m;
            break;
        }
    }
    if (rms[chosen] > rms_floor) {
        for (std::size_t m = 0; m < rms.size(); ++m) {
            bool beaten = false;
            for (std::size_t h = m + 1; h < rms.size(); ++h) beaten = beaten || rms[h] <= 0.1 * rms[m];
            if (!beaten) {
                chosen = m;
                break;
            }
        }
    }
    for (std::size_t m = 1; m < rms.size(); ++m) {
        std::ostringstream msg;
        msg << "order " << m << ": residual_rms " << rms[m] << (m == chosen ? " (selected)" : "");
        notes.push_back(msg.str());
    }

    if (chosen == 0) {
        auto r = empty_result(rms0, "model-order selection kept order 0");
        r.diagnostics.insert(r.diagnostics.end(), notes.begin(), notes.end());
        return r;
    }
    ReconstructionResult result = std::move(fits[chosen - 1]);
    result.diagnostics.insert(result.diagnostics.end(), notes.begin(), notes.end());
    return result;
}

}  // namespace pscat
