#pragma once

#include "discfill/beltrami.hpp"
#include "discfill/structures.hpp"

namespace discfill {

struct AttachError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Picard iteration did not reach the residual target: the numerical
/// signature of a degenerating disc family along a continuation.
struct AttachFailure : AttachError {
    AttachFailure(const std::string& msg, double residual) : AttachError(msg), last_residual(residual) {}
    double last_residual;
};

/// The iterate (or seed) touches w = 0.
struct DegeneracyError : AttachError {
    using AttachError::AttachError;
};

/// The seed's boundary trace does not have winding zero.
struct HomotopyClassError : AttachError {
    using AttachError::AttachError;
};

/// Product torus R·b𝔻 × t·b𝔻 that the disc boundaries are attached to.
struct TorusTarget {
    double R = 1.0;
    double t = 1.0;
};

/// Check that the torus is totally real for the given structure: the span
/// of its tangent plane and the J-image of that plane must be all of ℝ⁴.
/// Returns the smallest |det| of the combined frame over the sample grid.
double totally_real_margin(const TorusTarget& target, const AlmostComplexStructure& J, int samples = 64);

/// A J-complex disc in graph form: ζ ↦ (Rζ, w(ζ)) with w on a disc grid.
struct DiscSolution {
    GridFunction w;
    double R = 1.0;
    double t = 0.0;
    double tau = 0.0;
    double residual_norm = 0.0;
    double boundary_deviation = 0.0;
    double normalization_error = 0.0;
    int winding = 0;
    double min_abs_w = 0.0;
    double max_abs_w = 0.0;
    int picard_iterations = 0;
    /// Symplectic area ∫ f*ω; filled by the measurement layer.
    double area = std::numeric_limits<double>::quiet_NaN();
    /// Per-sweep Picard increments (sup norm in the log variable), for
    /// convergence plots.
    std::vector<double> step_history;
};

struct AttachOptions {
    /// Convergence is declared when the sup-norm Picard increment in the
    /// logarithmic variable falls below this. The iterates approach the
    /// discrete fixed point geometrically, so this can sit near machine
    /// precision even when the equation residual has a scheme-level floor
    /// (rough coefficient fields are differentiated at finite order).
    double step_tolerance = 1e-10;
    /// Sanity cap on the residual of the converged disc; exceeding it is an
    /// attach failure even if the iteration contracted.
    double residual_cap = 1e-3;
    int max_picard = 120;
    double min_damping = 1.0 / 64.0;
    SolveOptions inner;  // inner linear sweeps
};

/// Solve w_z̄ + a(z,w) w_z = b(z,w) on the unit disc with |w| = t on the
/// circle, winding zero, and w(1) = t e^{iτ}, by Picard iteration on the
/// substitution w = t e^{iτ} e^u (so Re u vanishes on the circle and the
/// zero-winding and non-vanishing conditions hold by construction).
///
/// For R ≠ 1 the graph lives over R𝔻 and is pulled back to the unit disc
/// (z ↦ Rz rescales the coefficients).
DiscSolution attach_disc(const TriangularStructure& T, const TorusTarget& target, double tau, const GridPtr& grid,
                         const AttachOptions& opts = {}, const GridFunction* w_init = nullptr);

/// Nonlinear residual max |w_z̄ + a w_z − b| of a candidate graph.
double graph_residual(const TriangularStructure& T, const TorusTarget& target, const GridFunction& w);

struct DiscCheckReport {
    double boundary_deviation = 0.0;
    double normalization_error = 0.0;
    int winding = 0;
    double min_abs_w = 0.0;
    /// Smallest distance between distinct graph points sharing no z-node;
    /// graphs over a grid are embedded as soon as this is positive, and it
    /// is bounded below by the z-node separation.
    double embedding_separation = 0.0;
    bool boundary_ok = false;
    bool winding_ok = false;
    bool normalization_ok = false;
    bool nonvanishing_ok = false;
    bool pass = false;
};

/// Definition-style checks on a computed disc (pure verification).
DiscCheckReport verify_admissible_disc(const DiscSolution& s, const TorusTarget& target, double boundary_tol = 1e-8,
                                       double normalization_tol = 1e-8);

/// Spectral (angular) + local polynomial (radial) interpolation onto a
/// finer grid of the same kind and outer radius; used for independent
/// residual checks on refined grids.
GridFunction interpolate_to(const GridFunction& f, const GridPtr& target);

}  // namespace discfill
