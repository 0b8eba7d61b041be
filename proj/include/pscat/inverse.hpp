#pragma once

// Plane data for the inverse problem: synthesis, the half-space lifting
// integral, scatterer localization and the parametric reconstruction of (Ξ, T, θ).
//
// Reconstruction fits the exact forward model
//   G(k0², x, y) = G0(k0², x - y) + Σ_jj' P_jj' G0(k0², x - ξ_j) G0(k0², y - ξ_j')
// to the plane samples. The model is linear in P and nonlinear in Ξ, so P is
// eliminated by linear least squares and Ξ is refined by Levenberg–Marquardt on
// the projected residual. This stands in for the unique-continuation argument,
// which has no direct numerical counterpart.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pscat/krein.hpp"
#include "pscat/types.hpp"

namespace pscat {

struct PlanePair {
    Point2 x;
    Point2 y;
    cplx g;
};

/// Samples of G_{θ,Ξ}(k0², (x, 0), (y, 0)) on the measurement plane.
struct PlaneSamples {
    double k0 = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<PlanePair> pairs;

    /// Throws ValidationError for k0 <= 0, negative sigma, x = y or non-finite values.
    void validate() const;
    double wavelength() const { return 2.0 * kPi / k0; }
};

/// count × count lattice of side `side` centered at `center`.
std::vector<Point2> square_grid(double side, int count, const Point2& center = Point2::Zero());

/// Evaluates G_{θ,Ξ}(k0², ·, ·) on all ordered pairs x != y of `grid` and adds
/// i.i.d. complex Gaussian noise (std `noise_sigma` per component) from `seed`.
/// Output is bit-identical for a given seed regardless of `threads`.
PlaneSamples synthesize_plane_data(const Configuration& config, double k0, const std::vector<Point2>& grid,
                                   double noise_sigma, std::uint64_t seed, unsigned threads = 1);

/// Plane samples of the free kernel G0(k0², x - y) (no scatterers).
PlaneSamples free_field_samples(double k0, const std::vector<Point2>& grid);

/// Median of |g| over all samples.
double median_abs(const PlaneSamples& samples);

// ---------------------------------------------------------------------------
// Lifting

/// Discretization of the half-space lifting integral.
struct LiftSpec {
    double radius = 0.0;       // truncation radius R
    double grid_step = 0.0;    // quadrature step h
    double taper_width = 0.0;  // raised-cosine band inside R

    /// R = 60/k0, h = π/(8 k0), taper = 20/k0.
    static LiftSpec defaults(double k0);
    /// Requires R >= 10/k0, h <= π/(4 k0), 0 <= taper <= R.
    void validate(double k0) const;
};

/// w(s, y): lifts plane data G(·, y) to s in the upper half-space.
///
/// The free part G0 is lifted analytically (it reproduces G0(s - y)); the smooth
/// scattered remainder is integrated with a tapered lattice rule whose nodes are
/// looked up in the sample grid. Throws DomainError for s_3 <= 0 and
/// CoverageError when the samples do not cover the quadrature disk.
cplx lift_to_halfspace(const PlaneSamples& samples, const LiftSpec& spec, const Vec3& s, const Point2& y);

/// Second pass: G(s, t) for s, t both above the plane, by re-lifting lifted values.
/// The data must contain pairs (σ', σ) for σ in the disk around s and σ' in the disk around t.
cplx lift_pair(const PlaneSamples& samples, const LiftSpec& spec, const Vec3& s, const Vec3& t);

// ---------------------------------------------------------------------------
// Localization

struct Box {
    Vec3 lo;
    Vec3 hi;
};

struct Candidate {
    Vec3 position;
    double indicator;
};

/// Normalized back-propagation indicator |Σ conj(b_p) (g - G0)| / ‖b_p‖ with
/// b_p(x, y) = G0(k0², x - p) G0(k0², y - p), evaluated at each point.
std::vector<double> indicator_values(const PlaneSamples& samples, const std::vector<Vec3>& points,
                                     unsigned threads = 1);

/// Indicator level below which a peak is indistinguishable from noise.
double indicator_floor(const PlaneSamples& samples);

/// Scans the box lattice and returns up to `max_order` local maxima above the
/// noise floor, separated by at least λ/2, strongest first.
std::vector<Candidate> locate_scatterers(const PlaneSamples& samples, const Box& box, double grid_step,
                                         int max_order, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Fitting

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-10;
};

struct ReconstructionResult {
    std::vector<Vec3> xi_hat;
    CMatrix p_hat;
    CMatrix tan_half_hat;
    std::optional<ThetaMatrix> theta_hat;
    double residual_rms = 0.0;
    double hermiticity_defect = 0.0;
    int model_order = 0;
    int iterations = 0;
    bool converged = true;
    std::vector<std::string> diagnostics;
};

/// Linear stage: P minimizing Σ |g - G0 - Σ P_jj' G0(x - ξ_j) G0(y - ξ_j')|² at fixed Ξ.
/// Throws RankDeficient naming the undetermined (j, j') entries.
CMatrix solve_linear_stage(const PlaneSamples& samples, const std::vector<Vec3>& xi);

/// T = P^{-1} + D(k0²) with D built from Ξ (no Hermitization).
CMatrix extract_tan_half(const CMatrix& p, const std::vector<Vec3>& xi, double k0);

/// Root-mean-square misfit of the forward model (Ξ, P) over all samples.
double model_residual_rms(const PlaneSamples& samples, const std::vector<Vec3>& xi, const CMatrix& p);

/// Fits (Ξ, P) from `initial_xi`, then recovers T̂ (Hermitized) and θ̂.
ReconstructionResult fit_model(const PlaneSamples& samples, const std::vector<Vec3>& initial_xi,
                               const FitOptions& options = {});

struct ReconstructOptions {
    double grid_step = 0.0;  // indicator lattice step; 0 selects λ/4
    int max_order = 3;
    int candidates_per_order = 3;
    FitOptions fit;
    unsigned threads = 1;
};

/// Localization, model-order selection and fitting. Orders are fitted greedily until the
/// residual reaches the noise floor or candidates come closer than λ/2. The result is the
/// smallest order at the floor, else the smallest order no higher order beats by a factor 10.
ReconstructionResult reconstruct(const PlaneSamples& samples, const Box& search_box,
                                 const ReconstructOptions& options = {});

}  // namespace pscat
