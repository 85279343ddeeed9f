#pragma once

#include <random>

#include "discfill/attach.hpp"
#include "discfill/symplectic.hpp"

namespace discfill {

struct ContinuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The t-march could not proceed: the step size underflowed against
/// persistent attach failures. Carries the last level that was completed
/// (the numerical analogue of a degenerating family).
struct ContinuationBreakdown : ContinuationError {
    ContinuationBreakdown(const std::string& msg, double t) : ContinuationError(msg), last_good_t(t) {}
    double last_good_t;
};

struct ContinuationConfig {
    double t_start = 0.1;
    double t_end = 1.0;
    double initial_step = 0.05;
    double step_shrink = 0.5;
    double step_grow = 1.5;
    double step_floor = 1e-4;
    int grow_after = 3;  // consecutive successes before the step grows
    int n_tau = 16;
    double R = 1.0;
    int grid_radial = 64;
    int grid_angular = 256;
    AttachOptions attach;
    double holder_alpha = 0.5;
    double delta_prime = 0.15;  // Hölder monitoring sub-annulus |z| ≥ 1 − δ'
    int threads = 1;

    void validate() const;
};

/// Per-level admissibility data gathered while the march runs.
struct LevelReport {
    double t = 0.0;
    double max_residual = 0.0;
    double max_boundary_deviation = 0.0;
    double max_normalization_error = 0.0;
    int max_abs_winding = 0;
    double min_abs_w = 0.0;                    // distance from the t = 0 disc {w = 0}
    double min_same_level_distance = 0.0;      // between distinct-τ graphs
    double min_boundary_distance = 0.0;        // between distinct-τ boundary traces
    double min_cross_level_distance = 0.0;     // against the previous level
    double separation_threshold = 0.0;
    double cover_gap = 0.0;                    // torus points vs boundary traces
    double cover_threshold = 0.0;
    double max_holder = 0.0;
    bool pass = false;
};

/// The computed two-parameter family {f^{t,τ}} with its per-level checks.
struct Foliation {
    double R = 1.0;
    AttachOptions attach;  // options the family was built with
    std::vector<double> t_levels;
    std::vector<double> taus;
    std::vector<std::vector<DiscSolution>> discs;  // [level][tau]
    std::vector<LevelReport> reports;
    double holder_bound_seen = 0.0;

    int level_count() const { return static_cast<int>(t_levels.size()); }
    int tau_count() const { return static_cast<int>(taus.size()); }
    const DiscSolution& disc(int level, int tau_index) const;
    bool all_pass() const;
    int nearest_level(double t) const;
};

/// March t from t_start to t_end, seeding each level's Picard solves with
/// the previous level's discs; halve the step on attach failure, grow it
/// after repeated successes, and fail loudly when the step underflows.
Foliation run_continuation(const TriangularStructure& T, const ContinuationConfig& cfg,
                           const SymplecticContext& ctx = SymplecticContext::standard());

/// Evaluate a grid function at an arbitrary point of its domain
/// (trigonometric in θ, 6-node polynomial in r).
Complex evaluate_at(const GridFunction& f, Complex z);

struct CoverSample {
    Point2c point{{0, 0}, {0, 0}};
    bool in_range = false;
    double gap = std::numeric_limits<double>::infinity();
    double t = 0.0;
    double tau = 0.0;
};

struct CoverReport {
    std::vector<CoverSample> samples;
    double max_gap = 0.0;
    int outside_range = 0;
    double threshold = 0.0;
    bool pass = false;
};

/// For each sample point in the covered shell, refine (t, τ) by warm-started
/// solves until a disc passes through it (within tolerance); points with
/// |w|-level outside [t_start, t_end] are reported as out of range.
CoverReport check_foliation_cover(const Foliation& F, const TriangularStructure& T,
                                  std::span<const Point2c> samples, double gap_tolerance = 1e-7);

/// Solve for the disc of the family passing through p (secant refinement in
/// (t, τ) from the nearest stored disc).
struct DiscThroughPoint {
    DiscSolution disc;
    double gap = 0.0;
    int solves = 0;
};
DiscThroughPoint find_disc_through(const Foliation& F, const TriangularStructure& T, const Point2c& p,
                                   double gap_tolerance = 1e-9, int max_solves = 60);

struct LeviFlatReport {
    int samples = 0;
    int anomalies = 0;  // sampled points with disc multiplicity != 1
    double max_point_residual = 0.0;
    double match_tolerance = 0.0;
    bool pass = false;
};

/// Constructive Levi-flatness check of Γᵗ: through each sampled point of
/// the level passes exactly one disc of the family.
LeviFlatReport leviflat_probe(const Foliation& F, const TriangularStructure& T, int level, int sample_count,
                              std::mt19937_64& rng);

struct RestartReport {
    int probes = 0;
    double max_deviation = 0.0;
};

/// Uniqueness probe: re-solve a subset of the family from perturbed seeds
/// and measure the worst sup-norm deviation from the stored discs.
RestartReport restart_stability_probe(const Foliation& F, const TriangularStructure& T, int max_probes,
                                      std::mt19937_64& rng, double perturbation = 0.02);

}  // namespace discfill
