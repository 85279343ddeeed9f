#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "discfill/fft.hpp"

namespace discfill {

using Complex = std::complex<double>;

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when the angular spectrum of a field does not decay enough for
/// spectral differentiation, or when a boundary curve is too ragged for
/// phase unwrapping.
struct ResolutionError : GridError {
    using GridError::GridError;
};

/// Thrown by winding_number when the curve touches zero.
struct UndefinedWindingError : GridError {
    using GridError::GridError;
};

struct NonFiniteError : GridError {
    using GridError::GridError;
};

/// One term of a radial finite-difference stencil. `angular_shift` is added
/// to the angular index modulo n_angular; disc grids use a half-turn shift
/// to reach across the origin (f at radius -r equals f at radius r, θ+π).
struct RadialStencilEntry {
    int node;
    int angular_shift;
    double weight;
};

inline constexpr int kRadialStencilWidth = 6;

/// Polar tensor grid on the closed unit disc or on an annulus.
///
/// Angular nodes are θ_k = 2πk/n_angular (n_angular a power of two, for
/// spectral differentiation). Disc grids place radial nodes at
/// r_j = (j + 1/2)Δr with Δr = 2/(2 n_radial − 1), so there is no node at
/// the origin and r = 1 is always the outermost layer. Annulus grids span
/// [inner_radius, outer_radius] with nodes at both ends; non-uniform radial
/// node sets are supported (used for reflected annuli).
///
/// Grids are immutable after construction and safe to share across threads.
class PolarGrid {
public:
    enum class Kind { Disc, Annulus };

    Kind kind() const { return kind_; }
    bool is_disc() const { return kind_ == Kind::Disc; }

    int n_radial() const { return static_cast<int>(radii_.size()); }
    int n_angular() const { return n_angular_; }

    double inner_radius() const { return inner_radius_; }  // 0 for a disc
    double outer_radius() const { return radii_.back(); }

    const std::vector<double>& radii() const { return radii_; }
    double radius(int j) const { return radii_[static_cast<std::size_t>(j)]; }
    double theta(int k) const;
    Complex node(int j, int k) const;

    std::size_t node_count() const { return radii_.size() * static_cast<std::size_t>(n_angular_); }
    std::size_t index(int j, int k) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_angular_) + static_cast<std::size_t>(k);
    }

    /// Per-node quadrature weight at radial layer j (area measure r dr dθ
    /// baked in; identical for all angular nodes of the layer).
    double quadrature_weight(int j) const { return area_weights_[static_cast<std::size_t>(j)]; }

    /// Exact area of the domain, π(outer² − inner²).
    double domain_area() const;

    /// Smallest radial node spacing.
    double radial_spacing() const { return min_radial_spacing_; }

    const FftPlan& fft() const { return *fft_; }

    std::span<const RadialStencilEntry> radial_stencil(int j) const;

    int index_of_radius(double r, double tol = 1e-12) const;

    static std::shared_ptr<const PolarGrid> make_disc(int n_radial, int n_angular);
    static std::shared_ptr<const PolarGrid> make_annulus(double inner_radius, int n_radial, int n_angular,
                                                         double outer_radius = 1.0);
    static std::shared_ptr<const PolarGrid> make_annulus_with_radii(std::vector<double> radii, int n_angular);

private:
    PolarGrid(Kind kind, std::vector<double> radii, int n_angular, double inner_radius);

    void build_quadrature();
    void build_stencils();

    Kind kind_;
    std::vector<double> radii_;
    int n_angular_;
    double inner_radius_;
    double min_radial_spacing_;
    std::vector<double> area_weights_;          // per radial layer
    std::vector<RadialStencilEntry> stencils_;  // 5 entries per radial node
    std::shared_ptr<FftPlan> fft_;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

inline GridPtr make_disc_grid(int n_radial, int n_angular) { return PolarGrid::make_disc(n_radial, n_angular); }
inline GridPtr make_annulus_grid(double inner_radius, int n_radial, int n_angular, double outer_radius = 1.0) {
    return PolarGrid::make_annulus(inner_radius, n_radial, n_angular, outer_radius);
}

/// Complex-valued field sampled on a PolarGrid, stored angular-major
/// (index = j·n_angular + k).
class GridFunction {
public:
    explicit GridFunction(GridPtr grid);
    GridFunction(GridPtr grid, std::vector<Complex> values);

    static GridFunction sample(const GridPtr& grid, const std::function<Complex(Complex)>& f);
    static GridFunction constant(const GridPtr& grid, Complex value);

    const PolarGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    Complex& at(int j, int k) { return values_[grid_->index(j, k)]; }
    Complex at(int j, int k) const { return values_[grid_->index(j, k)]; }

    std::span<Complex> values() { return values_; }
    std::span<const Complex> values() const { return values_; }

    std::size_t size() const { return values_.size(); }

    /// Values on the outermost circle (radius = outer_radius), k ascending.
    std::vector<Complex> boundary_trace() const;
    /// Values on the innermost layer.
    std::vector<Complex> inner_trace() const;

    double max_abs() const;
    double min_abs() const;
    bool is_finite() const;
    void require_finite(const char* context) const;

    GridFunction& operator+=(const GridFunction& rhs);
    GridFunction& operator-=(const GridFunction& rhs);
    GridFunction& operator*=(Complex s);
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(Complex s, GridFunction a) { return a *= s; }

private:
    GridPtr grid_;
    std::vector<Complex> values_;
};

struct DiffOptions {
    bool check_resolution = true;
    /// Relative angular-tail energy (top eighth of the spectrum) above which
    /// spectral differentiation refuses to proceed.
    double tail_threshold = 1e-3;
};

/// Wirtinger derivative ∂f/∂z via spectral differentiation in θ and
/// fourth-order finite differences in r.
GridFunction d_z(const GridFunction& f, const DiffOptions& opts = {});

/// Wirtinger derivative ∂f/∂z̄ (same scheme as d_z).
GridFunction d_zbar(const GridFunction& f, const DiffOptions& opts = {});

/// ∂f/∂θ along each radial layer, spectrally.
GridFunction angular_derivative(const GridFunction& f);

/// ∂f/∂r by the grid's radial stencils.
GridFunction radial_derivative(const GridFunction& f);

/// Quadrature-weighted integral over the grid's domain; exact for constants.
Complex integrate(const GridFunction& f);

/// Relative energy in the top eighth of the angular spectrum (resolution
/// diagnostic used by d_z/d_zbar).
double angular_tail_fraction(const GridFunction& f);

/// Total winding of a nowhere-zero closed curve sampled at equal angular
/// steps. Requires consecutive phase jumps < π.
int winding_number(std::span<const Complex> curve);

/// Hadamard product helper used by the solvers.
GridFunction hadamard(const GridFunction& a, const GridFunction& b);

/// Pointwise map helper.
GridFunction map_values(const GridFunction& a, const std::function<Complex(Complex)>& f);

/// Spectral derivative d/dθ of a closed curve sampled at 2πk/n (n a power
/// of two).
std::vector<Complex> curve_derivative(std::span<const Complex> curve);

/// Finite-difference weights for the d-th derivative at x0 from the given
/// nodes (Fornberg-style, via a local Vandermonde solve).
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int derivative);

}  // namespace discfill
