#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pscat/errors.hpp"
#include "pscat/inverse.hpp"
#include "pscat/parallel.hpp"
#include "plane_index.hpp"

namespace pscat {

namespace detail {

std::vector<double> indicator_on(const PlaneIndex& index, const std::vector<cplx>& data,
                                 const std::vector<Vec3>& probes, unsigned threads) {
    std::vector<double> out(probes.size(), 0.0);
    parallel_for(probes.size(), threads, [&](std::size_t q) {
        const CVector a = point_kernel(index, probes[q]);
        cplx num = 0.0;
        double den = 0.0;
        for (std::size_t m = 0; m < index.pair_count(); ++m) {
            const cplx b = a(index.first[m]) * a(index.second[m]);
            num += std::conj(b) * data[m];
            den += std::norm(b);
        }
        out[q] = den > 0.0 ? std::abs(num) / std::sqrt(den) : 0.0;
    });
    return out;
}

std::vector<Vec3> box_lattice(const Box& box, double step, int dims[3]) {
    std::vector<Vec3> lattice;
    for (int c = 0; c < 3; ++c) {
        dims[c] = int(std::floor((box.hi(c) - box.lo(c)) / step + 1e-9)) + 1;
    }
    lattice.reserve(std::size_t(dims[0]) * dims[1] * dims[2]);
    for (int k = 0; k < dims[2]; ++k) {
        for (int j = 0; j < dims[1]; ++j) {
            for (int i = 0; i < dims[0]; ++i) {
                lattice.emplace_back(box.lo.x() + i * step, box.lo.y() + j * step, box.lo.z() + k * step);
            }
        }
    }
    return lattice;
}

std::vector<Candidate> pick_peaks(const std::vector<Vec3>& lattice, const int dims[3],
                                  const std::vector<double>& values, double floor, double separation,
                                  int max_count) {
    auto at = [&](int i, int j, int k) { return values[(std::size_t(k) * dims[1] + j) * dims[0] + i]; };
    std::vector<std::size_t> maxima;
    for (int k = 0; k < dims[2]; ++k) {
        for (int j = 0; j < dims[1]; ++j) {
            for (int i = 0; i < dims[0]; ++i) {
                const double v = at(i, j, k);
                if (!(v > floor)) continue;
                bool peak = true;
                for (int dk = -1; dk <= 1 && peak; ++dk) {
                    for (int dj = -1; dj <= 1 && peak; ++dj) {
                        for (int di = -1; di <= 1 && peak; ++di) {
                            const int ii = i + di, jj = j + dj, kk = k + dk;
                            if ((di | dj | dk) == 0) continue;
                            if (ii < 0 || jj < 0 || kk < 0 || ii >= dims[0] || jj >= dims[1] || kk >= dims[2]) continue;
                            if (at(ii, jj, kk) > v) peak = false;
                        }
                    }
                }
                if (peak) maxima.push_back((std::size_t(k) * dims[1] + j) * dims[0] + i);
            }
        }
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    std::vector<Candidate> picked;
    for (std::size_t m : maxima) {
        if (int(picked.size()) >= max_count) break;
        const bool clear = std::all_of(picked.begin(), picked.end(), [&](const Candidate& c) {
            return (c.position - lattice[m]).norm() >= separation;
        });
        if (clear) picked.push_back(Candidate{lattice[m], values[m]});
    }
    return picked;
}

}  // namespace detail

std::vector<double> indicator_values(const PlaneSamples& samples, const std::vector<Vec3>& points, unsigned threads) {
    const auto index = detail::index_samples(samples);
    return detail::indicator_on(index, index.scattered, points, threads);
}

double indicator_floor(const PlaneSamples& samples) {
    // A unit-norm projection of complex noise has modulus ~ Rayleigh(σ); the second
    // term keeps roundoff in noiseless data from producing spurious peaks.
    const double m = double(samples.pairs.size());
    return 6.0 * std::sqrt(2.0) * samples.noise_sigma + 1e-9 * median_abs(samples) * std::sqrt(m);
}

std::vector<Candidate> locate_scatterers(const PlaneSamples& samples, const Box& box, double grid_step,
                                         int max_order, unsigned threads) {
    for (int c = 0; c < 3; ++c) {
        if (!(box.lo(c) <= box.hi(c))) throw DomainError("locate_scatterers: empty search box");
    }
    if (!(box.hi.z() < 0.0)) throw DomainError("locate_scatterers: search box must lie strictly below the plane");
    if (!(grid_step > 0.0)) throw DomainError("locate_scatterers: grid step must be positive");
    if (max_order < 0) throw DomainError("locate_scatterers: max_order must be non-negative");

    int dims[3];
    const auto lattice = detail::box_lattice(box, grid_step, dims);
    const auto values = indicator_values(samples, lattice, threads);
    return detail::pick_peaks(lattice, dims, values, indicator_floor(samples), 0.5 * samples.wavelength(),
                              max_order);
}

}  // namespace pscat
