#pragma once

#include <random>
#include <string>

#include "discfill/continuation.hpp"
#include "discfill/symplectic.hpp"

namespace discfill {

struct NonsqueezingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Polynomial holomorphic map g: 𝔻_ρ → ℂ² with g(0) = 0 (no constant
/// terms), used as a candidate analytic set through the origin.
struct AnalyticDiscCandidate {
    std::vector<Complex> coeff_z;  // coefficients of ζ, ζ², ...
    std::vector<Complex> coeff_w;
    double rho = 1.0;

    Point2c eval(Complex zeta) const;
    Point2c derivative(Complex zeta) const;
    int degree() const;
    bool nonconstant() const;

    static AnalyticDiscCandidate line(Complex dir_z, Complex dir_w, double rho = 1.0);
};

/// Domain of ℂ² described by smooth gauges: inside ⇔ every gauge < 0.
class DomainSpec {
public:
    using Gauge = std::function<double(const Point2c&)>;

    static DomainSpec ball(double r);
    static DomainSpec cylinder(double R);      // R𝔻 × ℂ
    static DomainSpec complex_bidisc();        // {|z| < 1, |w| < 1}
    static DomainSpec real_bidisc();           // {x1²+x2² < 1, y1²+y2² < 1}

    bool contains(const Point2c& p) const;
    const std::vector<Gauge>& gauges() const { return gauges_; }
    const std::string& name() const { return name_; }
    bool contains_origin() const;

private:
    DomainSpec(std::string name, std::vector<Gauge> gauges) : name_(std::move(name)), gauges_(std::move(gauges)) {}
    std::string name_;
    std::vector<Gauge> gauges_;
};

/// Euclidean area of g(𝔻_ρ) ∩ G: per-ray membership clipping with
/// bisection-refined crossings and Gauss panels (exact in the radial
/// variable for polynomial candidates), trapezoid (spectral) in the angle.
double clipped_area(const AnalyticDiscCandidate& c, const DomainSpec& G, int n_rays = 512);

/// True when every boundary point g(ρ e^{iθ}) lies outside the closed
/// domain (so the clipped candidate is closed in G).
bool exits_domain(const AnalyticDiscCandidate& c, const DomainSpec& G, int n_checks = 512);

/// Grow ρ until the candidate exits the domain; false if the cap is hit.
bool ensure_exit(AnalyticDiscCandidate& c, const DomainSpec& G, double rho_cap = 64.0);

struct LelongReport {
    double area = 0.0;
    double bound = 0.0;   // πr²
    double margin = 0.0;  // area − bound
    bool ok = false;
};

/// Lelong lower bound: the area of a candidate through 0 clipped to r𝔹 is
/// at least πr² (violations beyond tolerance indicate quadrature trouble).
LelongReport lelong_check(const AnalyticDiscCandidate& c, double r, double rel_tol = 1e-4);

struct RhOptions {
    int candidates = 1000;
    int degree = 4;
    int refine_rounds = 2;
    int evaluation_budget = 6000;
    int n_rays = 512;
};

struct RhEstimate {
    double value = 0.0;      // min over the family of sqrt(area/π)
    double best_area = 0.0;
    AnalyticDiscCandidate best;
    int evaluations = 0;
    bool budget_exhausted = false;
};

/// Upper estimate of the holomorphic radius over the sampled polynomial
/// family (stratified with exact complex lines) plus coordinate-descent
/// refinement around the best candidate. An upper bound only: the true
/// rh is an infimum over all analytic sets.
RhEstimate rh_upper_estimate(const DomainSpec& G, std::mt19937_64& rng, const RhOptions& opts = {});

/// Random polynomial candidate through the origin (nonzero leading pair,
/// so ensure_exit always succeeds).
AnalyticDiscCandidate random_candidate(std::mt19937_64& rng, int degree, double scale = 0.7);

struct BidiscCandidateStat {
    double area_bidisc = 0.0;
    double area_ball = 0.0;
    double excess = 0.0;              // E(X) − E(X ∩ 𝔹)
    double boundary_concentration = 0.0;  // fraction of exit points near S1 ∪ S2
};

struct BidiscProbeReport {
    bool ball_inside_bidisc = true;
    double max_interface_distance = 0.0;  // b𝔹 ∩ b𝔻²ℝ points vs S1 ∪ S2
    double origin_curve_value = 0.0;      // (z1²+z2²)² at the origin (≠ 1)
    std::vector<BidiscCandidateStat> candidates;
    int concentrated_candidates = 0;
    bool concentrated_all_excess_positive = true;
    bool lelong_all_ok = true;
};

/// Numerical walk through the real-bidisc geometry: 𝔹 ⊂ 𝔻²ℝ, the
/// boundary interface lies on the two distinguished circles, the algebraic
/// curve misses the origin, and boundary-concentrated candidates stick out
/// of the ball.
BidiscProbeReport real_bidisc_probe(std::mt19937_64& rng, int candidate_count = 200);

struct SqueezeExperiment {
    HamiltonianMap phi;  // symplectomorphism G1 → cylinder
    double g1_radius = 0.8;
    double R = 1.0;
    std::vector<int> exhaustion = {2, 4, 8};  // K_n = (1 − 1/(n+1))·G1
    int grid_radial = 64;
    int grid_angular = 256;
    ContinuationConfig march;  // step policy for the t-march
    int taming_samples = 400;

    static SqueezeExperiment shear_preset(double strength = 0.18, double sigma = 0.4);
    static SqueezeExperiment identity_preset(double r = 0.8);
};

struct SqueezeStage {
    int n = 0;
    double k_radius = 0.0;
    double disc_area = 0.0;          // E(D), expected πR²
    double clipped_image_area = 0.0; // E(φ(K_n) ∩ D)
    double pulled_back_area = 0.0;   // E(X_n)
    double transport_gap = 0.0;      // |E(φ(K_n) ∩ D) − E(X_n)|
    double rh_certificate = 0.0;     // sqrt(E(X_n)/π) ≤ R
    double point_gap = 0.0;          // distance of D from φ(0)
};

struct SqueezeReport {
    bool complete = false;
    std::string diagnostic;
    double R = 0.0;
    Point2c image_of_origin{{0, 0}, {0, 0}};
    double pushforward_taming_margin = 0.0;
    std::vector<SqueezeStage> stages;
    double max_disc_area_error = 0.0;  // max |E(D) − πR²|
    double max_transport_gap = 0.0;
    double certificate = 0.0;  // max stage certificate (≤ R + tol on success)
};

/// The full pipeline: pushforward of J_st by φ, convex cutoff between the
/// exhaustion stages, continuation in the product model for the disc
/// through φ(0), clipping and pull-back, and the rh certificate.
SqueezeReport run_squeeze_experiment(const SqueezeExperiment& e);

}  // namespace discfill
