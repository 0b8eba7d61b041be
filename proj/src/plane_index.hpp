#pragma once

// Samples re-expressed over the distinct plane points they touch, so per-point
// kernels G0(x - p) are evaluated once rather than once per pair.

#include <vector>

#include "pscat/inverse.hpp"

namespace pscat::detail {

struct PlaneIndex {
    double k0 = 0.0;
    std::vector<Vec3> points;     // distinct sample points lifted to x3 = 0
    std::vector<int> first;       // pair -> index of x
    std::vector<int> second;      // pair -> index of y
    std::vector<cplx> scattered;  // g - G0(k0², x - y)

    std::size_t pair_count() const { return first.size(); }
};

PlaneIndex index_samples(const PlaneSamples& samples);

/// G0(k0², |point - p|) for every indexed point.
CVector point_kernel(const PlaneIndex& index, const Vec3& p);

/// Per-pair misfit (g - G0) - Σ P_jj' G0(x - ξ_j) G0(y - ξ_j').
std::vector<cplx> model_residual(const PlaneIndex& index, const std::vector<Vec3>& xi, const CMatrix& p);

/// Normalized indicator for arbitrary scattered data living on the index pairs.
std::vector<double> indicator_on(const PlaneIndex& index, const std::vector<cplx>& data,
                                 const std::vector<Vec3>& probes, unsigned threads);

/// Lattice points of a box, x fastest.
std::vector<Vec3> box_lattice(const Box& box, double step, int dims[3]);

/// Greedy local-maximum selection over a box lattice.
std::vector<Candidate> pick_peaks(const std::vector<Vec3>& lattice, const int dims[3],
                                  const std::vector<double>& values, double floor, double separation,
                                  int max_count);

}  // namespace pscat::detail
