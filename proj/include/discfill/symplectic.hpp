#pragma once

#include "discfill/attach.hpp"
#include "discfill/structures.hpp"

namespace discfill {

struct SymplecticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Symplectic-integrator step failed its invariant-drift check.
struct AccuracyError : SymplecticError {
    using SymplecticError::SymplecticError;
};

/// Pointwise 2-form ω(p)(V, W) and 1-form λ(p)(V) on ℝ⁴ ≅ ℂ².
using TwoForm = std::function<double(const Point2c&, const Vec4&, const Vec4&)>;
using OneForm = std::function<double(const Point2c&, const Vec4&)>;

/// The symplectic data of a run: ω, a Liouville primitive λ with dλ = ω,
/// and the almost complex structure pairing with ω into the metric μ.
struct SymplecticContext {
    TwoForm omega;
    OneForm lambda;
    AlmostComplexStructure structure = AlmostComplexStructure::standard();

    /// ω_st with λ = ½ Σ (x_j dy_j − y_j dx_j) (the real part of the usual
    /// (i/2)(z dz̄ + w dw̄); they differ by an exact form and integrate
    /// identically over closed curves).
    static SymplecticContext standard();
    SymplecticContext with_structure(AlmostComplexStructure J) const;
};

/// Max |dλ − ω| over the sample points, evaluated on coordinate planes by
/// central differences.
double exactness_defect(const SymplecticContext& ctx, std::span<const Point2c> samples, double step = 1e-5);

/// ∬ F*ω over the grid for a parametrized surface F = (F1, F2) on a disc
/// grid; optional mask (real values in [0,1]) restricts the quadrature.
double pullback_area(const GridFunction& f1, const GridFunction& f2, const SymplecticContext& ctx,
                     const GridFunction* mask = nullptr);

/// E(f) = ∬ f*ω for the graph disc f(ζ) = (Rζ, w(ζ)).
double area(const DiscSolution& s, const SymplecticContext& ctx);

/// ∮ f*λ along the boundary circle; equals area(s) when ω = dλ holds
/// around the disc (Stokes).
double boundary_area(const DiscSolution& s, const SymplecticContext& ctx);

/// ∮ λ along an arbitrary closed curve (z(θ), w(θ)) sampled at equal
/// angular steps (power-of-two count).
double boundary_area_of_curve(std::span<const Complex> z_curve, std::span<const Complex> w_curve,
                              const SymplecticContext& ctx);

/// μ-length of the disc boundary.
double boundary_length(const DiscSolution& s, const SymplecticContext& ctx);

/// √μ(V, V) at p; positive for V ≠ 0 when the structure is tamed there.
double metric_norm(const Vec4& v, const Point2c& p, const SymplecticContext& ctx);

struct HamiltonianOptions {
    double dt = 1e-2;
    /// Max drift of H along probe trajectories before the step size is
    /// declared too coarse.
    double drift_threshold = 1e-8;
    std::vector<Point2c> drift_probes = {{{0.3, 0.1}, {0.2, -0.1}}, {{-0.2, 0.4}, {0.1, 0.3}}};
};

/// Time-T flow of a compactly supported Hamiltonian, integrated by the
/// implicit midpoint rule (symplectic; preserves ω_st to solver tolerance).
/// Closed-form evaluation paths can be installed for flows that admit them.
class HamiltonianMap {
public:
    using Scalar = std::function<double(const Point2c&)>;
    using Gradient = std::function<Vec4(const Point2c&)>;

    HamiltonianMap(Scalar hamiltonian, double flow_time, const HamiltonianOptions& opts = {},
                   Gradient gradient = nullptr);

    Point2c forward(const Point2c& p) const;
    Point2c inverse(const Point2c& p) const;
    /// dφ at p by central differences across the flow (step 1e-5), or the
    /// installed closed form.
    Mat4 differential(const Point2c& p) const;

    Diffeomorphism as_diffeomorphism() const;

    /// Max |φ*ω_st − ω_st| at p over coordinate plane pairs.
    double pullback_defect(const Point2c& p) const;

    /// |H(φ(p)) − H(p)|, the conserved-quantity drift.
    double invariant_drift(const Point2c& p) const;

    double flow_time() const { return time_; }
    const Scalar& hamiltonian() const { return h_; }

    /// Planar shear generated by H = (strength·σ√π/2)·erf(y1/σ): the flow
    /// is x1 ↦ x1 + T·strength·exp(−(y1/σ)²) with everything else fixed;
    /// exact closed forms are installed for all evaluation paths.
    static HamiltonianMap planar_shear(double strength, double sigma, double flow_time);

private:
    Point2c integrate(Point2c p, double total_time) const;

    Scalar h_;
    Gradient grad_;
    double time_;
    HamiltonianOptions opts_;
    // Optional closed forms (exact flows).
    std::function<Point2c(const Point2c&)> exact_forward_;
    std::function<Point2c(const Point2c&)> exact_inverse_;
    std::function<Mat4(const Point2c&)> exact_differential_;
};

inline HamiltonianMap make_hamiltonian_map(HamiltonianMap::Scalar H, double flow_time,
                                           const HamiltonianOptions& opts = {},
                                           HamiltonianMap::Gradient gradient = nullptr) {
    return HamiltonianMap(std::move(H), flow_time, opts, std::move(gradient));
}

}  // namespace discfill
