#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "pscat/errors.hpp"
#include "pscat/inverse.hpp"
#include "pscat/parallel.hpp"
#include "pscat/random.hpp"
#include "plane_index.hpp"

namespace pscat {

void PlaneSamples::validate() const {
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw ValidationError("samples: k0 must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ValidationError("samples: noise_sigma must be non-negative");
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        if (!p.x.allFinite() || !p.y.allFinite() || !std::isfinite(p.g.real()) || !std::isfinite(p.g.imag())) {
            throw ValidationError("samples: pair " + std::to_string(i) + " has non-finite values");
        }
        if (p.x == p.y) throw ValidationError("samples: pair " + std::to_string(i) + " has x == y");
    }
}

std::vector<Point2> square_grid(double side, int count, const Point2& center) {
    if (count < 1 || !(side >= 0.0)) throw ValidationError("grid needs count >= 1 and side >= 0");
    std::vector<Point2> grid;
    grid.reserve(std::size_t(count) * count);
    const double step = count > 1 ? side / (count - 1) : 0.0;
    const double start = count > 1 ? -0.5 * side : 0.0;
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            grid.emplace_back(center.x() + start + i * step, center.y() + start + j * step);
        }
    }
    return grid;
}

namespace {

std::vector<std::pair<int, int>> ordered_pairs(std::size_t n) {
    std::vector<std::pair<int, int>> out;
    out.reserve(n * (n > 0 ? n - 1 : 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) out.emplace_back(int(i), int(j));
        }
    }
    return out;
}

void check_distinct(const std::vector<Point2>& grid) {
    std::vector<Point2> sorted = grid;
    std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] == sorted[i - 1]) throw ValidationError("grid contains duplicate points");
    }
}

}  // namespace

PlaneSamples synthesize_plane_data(const Configuration& config, double k0, const std::vector<Point2>& grid,
                                   double noise_sigma, std::uint64_t seed, unsigned threads) {
    if (!config.half_space()) {
        for (const auto& p : config.xi()) {
            if (!(p.z() < 0.0)) throw DomainError("synthesize_plane_data: scatterers must lie below the plane");
        }
    }
    if (!(k0 > 0.0)) throw DomainError("synthesize_plane_data: k0 must be positive");
    if (!(noise_sigma >= 0.0)) throw DomainError("synthesize_plane_data: noise_sigma must be non-negative");
    check_distinct(grid);

    const PerturbedGreen green(config, ComplexEnergy::from_wavenumber(k0));
    const auto& xi = config.xi();
    const auto& p = green.krein().p;
    const auto z = green.krein().z;

    std::vector<CVector> basis(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const Vec3 x = on_plane(grid[i]);
        CVector a(xi.size());
        for (std::size_t j = 0; j < xi.size(); ++j) a(j) = g0_3d(z, (x - xi[j]).norm());
        basis[i] = a;
    });

    const auto index_pairs = ordered_pairs(grid.size());
    PlaneSamples out;
    out.k0 = k0;
    out.noise_sigma = noise_sigma;
    out.seed = seed;
    out.pairs.resize(index_pairs.size());
    parallel_for(index_pairs.size(), threads, [&](std::size_t m) {
        const auto [i, j] = index_pairs[m];
        const double r = (grid[i] - grid[j]).norm();
        const cplx g = g0_3d(z, r) + cplx(basis[i].transpose() * p * basis[j]);
        out.pairs[m] = PlanePair{grid[i], grid[j], g};
    });

    if (noise_sigma > 0.0) {
        Rng rng(seed);
        for (auto& pair : out.pairs) pair.g += rng.complex_normal(noise_sigma);
    }
    return out;
}

PlaneSamples free_field_samples(double k0, const std::vector<Point2>& grid) {
    check_distinct(grid);
    const auto z = ComplexEnergy::from_wavenumber(k0);
    PlaneSamples out;
    out.k0 = k0;
    for (const auto& [i, j] : ordered_pairs(grid.size())) {
        out.pairs.push_back(PlanePair{grid[i], grid[j], g0_3d(z, (grid[i] - grid[j]).norm())});
    }
    return out;
}

double median_abs(const PlaneSamples& samples) {
    if (samples.pairs.empty()) return 0.0;
    std::vector<double> mags;
    mags.reserve(samples.pairs.size());
    for (const auto& p : samples.pairs) mags.push_back(std::abs(p.g));
    auto mid = mags.begin() + mags.size() / 2;
    std::nth_element(mags.begin(), mid, mags.end());
    return *mid;
}

namespace detail {

PlaneIndex index_samples(const PlaneSamples& samples) {
    samples.validate();
    PlaneIndex index;
    index.k0 = samples.k0;
    std::map<std::pair<double, double>, int> lookup;
    auto id_of = [&](const Point2& p) {
        auto [it, inserted] = lookup.emplace(std::make_pair(p.x(), p.y()), int(index.points.size()));
        if (inserted) index.points.push_back(on_plane(p));
        return it->second;
    };
    const auto z = ComplexEnergy::from_wavenumber(samples.k0);
    index.first.reserve(samples.pairs.size());
    index.second.reserve(samples.pairs.size());
    index.scattered.reserve(samples.pairs.size());
    for (const auto& pair : samples.pairs) {
        index.first.push_back(id_of(pair.x));
        index.second.push_back(id_of(pair.y));
        index.scattered.push_back(pair.g - g0_3d(z, (pair.x - pair.y).norm()));
    }
    return index;
}

CVector point_kernel(const PlaneIndex& index, const Vec3& p) {
    const auto z = ComplexEnergy::from_wavenumber(index.k0);
    CVector a(index.points.size());
    for (std::size_t u = 0; u < index.points.size(); ++u) a(u) = g0_3d(z, (index.points[u] - p).norm());
    return a;
}

}  // namespace detail

}  // namespace pscat
