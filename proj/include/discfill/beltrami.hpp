#pragma once

#include <optional>

#include "discfill/grid.hpp"

namespace discfill {

struct BeltramiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// q₀ ≥ 1: the equation is not elliptic and the iteration has no business
/// converging.
struct EllipticityError : BeltramiError {
    using BeltramiError::BeltramiError;
};
/// Fixed-point iteration stagnated or grew; carries the last residual in
/// the message.
struct DivergenceError : BeltramiError {
    using BeltramiError::BeltramiError;
};
/// reflect_extend precondition failed (|w| not pinned to 1 on the circle,
/// or w degenerate on the annulus).
struct HypothesisError : BeltramiError {
    using BeltramiError::BeltramiError;
};

/// Right inverse of ∂/∂z̄ on a polar grid: u = T g with u_z̄ = g, where T is
/// the Cauchy–Green transform u(z) = −(1/π)∬ g(ζ)/(ζ−z) dA(ζ).
///
/// The area integral is evaluated exactly in the angular variable (the
/// angular integral of the 1/(ζ−z) kernel collapses per Fourier mode) and
/// with exact panel moments against the resulting radial kernels, which are
/// uniformly bounded by 1. Fourth order in the radial spacing, spectral in θ.
class CauchyGreen {
public:
    explicit CauchyGreen(GridPtr grid);

    const GridPtr& grid() const { return grid_; }

    GridFunction apply(const GridFunction& g) const;

private:
    GridPtr grid_;
    int na_;
    int nr_;
    // Per (signed mode, panel): 6 interpolation-node weights and the
    // radial propagation factor of the marching recurrence.
    std::vector<double> panel_weights_;  // [mode_index][panel][4]
    std::vector<double> propagation_;    // [mode_index][panel]
    std::vector<int> panel_base_;        // [panel] first stencil node
    std::vector<double> origin_weights_; // [K][4] disc-only inner segment, K = -m
    std::size_t wi(int mode_index, int panel, int node) const {
        return (static_cast<std::size_t>(mode_index) * static_cast<std::size_t>(nr_ - 1) +
                static_cast<std::size_t>(panel)) * 6 + static_cast<std::size_t>(node);
    }
    std::size_t pi(int mode_index, int panel) const {
        return static_cast<std::size_t>(mode_index) * static_cast<std::size_t>(nr_ - 1) +
               static_cast<std::size_t>(panel);
    }
};

/// One-shot convenience wrapper around CauchyGreen::apply.
GridFunction cauchy_green(const GridFunction& g);

/// Boundary data for the linear solver. Dirichlet pins the full trace on
/// the outer circle (and optionally the inner circle on annuli); ReTrace
/// pins Re w on the outer circle together with Im w at the node z = 1.
class BoundaryCondition {
public:
    enum class Kind { None, Dirichlet, ReTrace };

    static BoundaryCondition none();
    static BoundaryCondition dirichlet(std::vector<Complex> outer_trace);
    static BoundaryCondition dirichlet_annulus(std::vector<Complex> outer_trace, std::vector<Complex> inner_trace);
    static BoundaryCondition re_trace(std::vector<double> outer_re, double im_at_one = 0.0);

    Kind kind() const { return kind_; }
    const std::vector<Complex>& outer_trace() const { return outer_trace_; }
    const std::vector<Complex>& inner_trace() const { return inner_trace_; }
    const std::vector<double>& outer_re() const { return outer_re_; }
    double im_at_one() const { return im_at_one_; }

private:
    BoundaryCondition() = default;
    Kind kind_ = Kind::None;
    std::vector<Complex> outer_trace_;
    std::vector<Complex> inner_trace_;
    std::vector<double> outer_re_;
    double im_at_one_ = 0.0;
};

struct BeltramiProblem {
    GridFunction q;
    GridFunction Q;
    double q_bound = 0.0;  // measured max |q|, must stay below 1
    double Q_bound = 0.0;  // measured max |Q|

    BeltramiProblem(GridFunction q_field, GridFunction rhs);
};

struct SolveOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
    /// Under-relaxation floor used when the iteration is caught growing.
    double min_relaxation = 1.0 / 16.0;
    /// When true, a residual that has stopped improving is returned (with
    /// reached_tolerance = false) instead of raising DivergenceError; the
    /// discrete fixed point often sits above very tight tolerances.
    bool stop_at_floor = false;
};

struct BeltramiSolution {
    GridFunction w;
    double residual_norm = 0.0;
    int iterations = 0;
    bool reached_tolerance = false;
    std::vector<double> residual_history;
};

/// Fixed-point solve of w_z̄ = q w_z + Q: w ← T(q w_z + Q) + h with the
/// holomorphic correction h fitted to the boundary condition each sweep.
BeltramiSolution solve_beltrami(const BeltramiProblem& p, const BoundaryCondition& bc, const SolveOptions& opts = {});

/// Same, reusing a prebuilt transform and optional warm start.
BeltramiSolution solve_beltrami(const BeltramiProblem& p, const BoundaryCondition& bc, const CauchyGreen& transform,
                                const SolveOptions& opts, const GridFunction* warm_start = nullptr);

/// Pointwise defect w_z̄ − q w_z − Q.
GridFunction beltrami_residual_field(const GridFunction& w, const GridFunction& q, const GridFunction& Q);

struct ReflectedFields {
    GridPtr grid;  // annulus doubled across |z| = 1
    GridFunction w;
    GridFunction q;
    GridFunction Q;
    double epsilon = 0.0;          // measured lower bound of |w| (and 1/max|w|)
    double q_bound = 0.0;          // max |q| after extension (equals the input bound)
    double Q_bound = 0.0;          // max |Q| after extension
    double outer_residual = 0.0;   // max defect of the extended equation on the reflected half
};

/// Reflection extension across the unit circle: w(z) = (w(z*))*,
/// q(z) = conj(q(z*)) z² (z*)², Q(z) = conj(Q(z*)) (z*)² w(z)², z* = 1/z̄.
/// Requires an annulus grid with outer radius 1 and |w| = 1 on the circle.
ReflectedFields reflect_extend(const GridFunction& w, const GridFunction& q, const GridFunction& Q,
                               double boundary_tol = 1e-8);

/// Discrete Hölder (C^α) seminorm of w over the sub-annulus |z| ≥ 1 − δ′:
/// max over node pairs of |w(x) − w(y)| / |x − y|^α. Node pairs are strided
/// deterministically when their count exceeds pair_budget.
double holder_monitor(const GridFunction& w, double alpha, double delta_prime,
                      std::size_t pair_budget = 2000000);

/// Holomorphic function on the disc with prescribed real part on the circle
/// and prescribed imaginary part at z = 1 (Schwarz reconstruction).
GridFunction schwarz_extension(const GridPtr& disc, std::span<const double> boundary_re, double im_at_one);

/// Holomorphic function whose trace best matches the given boundary values:
/// on a disc, the analytic (non-negative mode) projection; on an annulus,
/// the per-mode least-squares Laurent fit to the outer and inner traces.
GridFunction analytic_completion(const GridPtr& grid, std::span<const Complex> outer_values,
                                 std::span<const Complex> inner_values = {});

}  // namespace discfill
