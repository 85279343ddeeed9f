#include "discfill/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace discfill {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string describe(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// 3-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGaussNode = 0.7745966692414834;  // sqrt(3/5)
constexpr double kGaussW0 = 8.0 / 9.0;
constexpr double kGaussW1 = 5.0 / 9.0;

}  // namespace

std::vector<double> fd_weights(double x0, std::span<const double> nodes, int derivative) {
    const int n = static_cast<int>(nodes.size());
    if (derivative >= n) throw std::invalid_argument("fd_weights: stencil too small for derivative order");
    double h = 0.0;
    for (double x : nodes) h = std::max(h, std::abs(x - x0));
    if (h == 0.0) h = 1.0;

    // Solve M^T w = rhs with M_{i,k} = ((x_i-x0)/h)^k, rhs_k = d! h^{-d} δ_{k,d}.
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double t = (nodes[static_cast<std::size_t>(i)] - x0) / h;
        double p = 1.0;
        for (int k = 0; k < n; ++k) {
            m[static_cast<std::size_t>(k) * n + i] = p;  // row k, col i of M^T
            p *= t;
        }
    }
    double fact = 1.0;
    for (int k = 2; k <= derivative; ++k) fact *= k;
    rhs[static_cast<std::size_t>(derivative)] = fact / std::pow(h, derivative);

    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(m[static_cast<std::size_t>(r) * n + col]) >
                std::abs(m[static_cast<std::size_t>(piv) * n + col]))
                piv = r;
        }
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(m[static_cast<std::size_t>(col) * n + c], m[static_cast<std::size_t>(piv) * n + c]);
            std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(piv)]);
        }
        const double d = m[static_cast<std::size_t>(col) * n + col];
        if (d == 0.0) throw std::runtime_error("fd_weights: singular stencil");
        for (int r = col + 1; r < n; ++r) {
            const double f = m[static_cast<std::size_t>(r) * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                m[static_cast<std::size_t>(r) * n + c] -= f * m[static_cast<std::size_t>(col) * n + c];
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) s -= m[static_cast<std::size_t>(r) * n + c] * w[static_cast<std::size_t>(c)];
        w[static_cast<std::size_t>(r)] = s / m[static_cast<std::size_t>(r) * n + r];
    }
    return w;
}

PolarGrid::PolarGrid(Kind kind, std::vector<double> radii, int n_angular, double inner_radius)
    : kind_(kind), radii_(std::move(radii)), n_angular_(n_angular), inner_radius_(inner_radius) {
    if (!is_power_of_two(n_angular_)) throw GridError("PolarGrid: n_angular must be a power of two");
    if (radii_.size() < kRadialStencilWidth) throw GridError("PolarGrid: need at least 6 radial nodes");
    for (std::size_t j = 0; j + 1 < radii_.size(); ++j) {
        if (!(radii_[j] < radii_[j + 1])) throw GridError("PolarGrid: radii must be strictly increasing");
    }
    if (radii_.front() <= 0.0) throw GridError("PolarGrid: radii must be positive");
    min_radial_spacing_ = radii_[1] - radii_[0];
    for (std::size_t j = 1; j + 1 < radii_.size(); ++j) {
        min_radial_spacing_ = std::min(min_radial_spacing_, radii_[j + 1] - radii_[j]);
    }
    fft_ = std::make_shared<FftPlan>(static_cast<std::size_t>(n_angular_));
    build_quadrature();
    build_stencils();
}

double PolarGrid::theta(int k) const { return 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_angular_); }

Complex PolarGrid::node(int j, int k) const {
    const double r = radius(j);
    const double t = theta(k);
    return {r * std::cos(t), r * std::sin(t)};
}

double PolarGrid::domain_area() const {
    return kPi * (outer_radius() * outer_radius() - inner_radius_ * inner_radius_);
}

int PolarGrid::index_of_radius(double r, double tol) const {
    for (std::size_t j = 0; j < radii_.size(); ++j) {
        if (std::abs(radii_[j] - r) <= tol) return static_cast<int>(j);
    }
    throw GridError("PolarGrid: radius " + describe(r) + " is not a node layer");
}

void PolarGrid::build_quadrature() {
    // Radial rule: integrate the piecewise-cubic interpolant of H(r) = f(r)·r
    // over [inner, outer]; cell edges are node midpoints, with the domain ends
    // closing the first and last cells. Fourth order, and exact for f ≡ 1.
    const int nr = n_radial();
    std::vector<double> edges(static_cast<std::size_t>(nr) + 1);
    edges[0] = inner_radius_;
    for (int j = 1; j < nr; ++j) edges[static_cast<std::size_t>(j)] = 0.5 * (radii_[j - 1] + radii_[j]);
    edges[static_cast<std::size_t>(nr)] = outer_radius();

    std::vector<double> hweight(static_cast<std::size_t>(nr), 0.0);
    for (int cell = 0; cell < nr; ++cell) {
        int base = std::clamp(cell - 1, 0, nr - 4);
        const double* xs = &radii_[static_cast<std::size_t>(base)];
        const double a = edges[static_cast<std::size_t>(cell)];
        const double b = edges[static_cast<std::size_t>(cell) + 1];
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        const double gp[3] = {mid - half * kGaussNode, mid, mid + half * kGaussNode};
        const double gw[3] = {half * kGaussW1, half * kGaussW0, half * kGaussW1};
        for (int g = 0; g < 3; ++g) {
            for (int i = 0; i < 4; ++i) {
                double l = 1.0;
                for (int q = 0; q < 4; ++q) {
                    if (q == i) continue;
                    l *= (gp[g] - xs[q]) / (xs[i] - xs[q]);
                }
                hweight[static_cast<std::size_t>(base + i)] += gw[g] * l;
            }
        }
    }

    const double dtheta = 2.0 * kPi / static_cast<double>(n_angular_);
    area_weights_.resize(static_cast<std::size_t>(nr));
    for (int j = 0; j < nr; ++j) {
        const double w = hweight[static_cast<std::size_t>(j)] * radii_[static_cast<std::size_t>(j)] * dtheta;
        if (!(w > 0.0)) throw GridError("PolarGrid: non-positive quadrature weight at layer " + std::to_string(j));
        area_weights_[static_cast<std::size_t>(j)] = w;
    }
}

void PolarGrid::build_stencils() {
    const int nr = n_radial();
    constexpr int w5 = kRadialStencilWidth;
    stencils_.resize(static_cast<std::size_t>(nr) * w5);
    const int half_turn = n_angular_ / 2;
    for (int j = 0; j < nr; ++j) {
        double xs[w5];
        RadialStencilEntry* row = &stencils_[static_cast<std::size_t>(j) * w5];
        if (is_disc() && j < 2) {
            // Centered stencil reaching across the origin: radius -r, angle θ
            // is the node at radius r, angle θ+π.
            for (int s = 0; s < w5; ++s) {
                const int jj = j - 2 + s;
                if (jj < 0) {
                    row[s] = {-1 - jj, half_turn, 0.0};
                    xs[s] = -radii_[static_cast<std::size_t>(-1 - jj)];
                } else {
                    row[s] = {jj, 0, 0.0};
                    xs[s] = radii_[static_cast<std::size_t>(jj)];
                }
            }
        } else {
            const int base = std::clamp(j - 2, 0, nr - w5);
            for (int s = 0; s < w5; ++s) {
                row[s] = {base + s, 0, 0.0};
                xs[s] = radii_[static_cast<std::size_t>(base + s)];
            }
        }
        auto w = fd_weights(radii_[static_cast<std::size_t>(j)], std::span<const double>(xs, w5), 1);
        for (int s = 0; s < w5; ++s) row[s].weight = w[static_cast<std::size_t>(s)];
    }
}

std::span<const RadialStencilEntry> PolarGrid::radial_stencil(int j) const {
    return {&stencils_[static_cast<std::size_t>(j) * kRadialStencilWidth], kRadialStencilWidth};
}

std::shared_ptr<const PolarGrid> PolarGrid::make_disc(int n_radial, int n_angular) {
    if (n_radial < kRadialStencilWidth) throw GridError("make_disc: n_radial must be at least 6");
    const double dr = 2.0 / (2.0 * n_radial - 1.0);
    std::vector<double> radii(static_cast<std::size_t>(n_radial));
    for (int j = 0; j < n_radial; ++j) radii[static_cast<std::size_t>(j)] = (j + 0.5) * dr;
    radii.back() = 1.0;  // exact
    return std::shared_ptr<const PolarGrid>(new PolarGrid(Kind::Disc, std::move(radii), n_angular, 0.0));
}

std::shared_ptr<const PolarGrid> PolarGrid::make_annulus(double inner_radius, int n_radial, int n_angular,
                                                         double outer_radius) {
    if (!(inner_radius > 0.0 && inner_radius < outer_radius))
        throw GridError("make_annulus: need 0 < inner_radius < outer_radius");
    if (n_radial < kRadialStencilWidth) throw GridError("make_annulus: n_radial must be at least 6");
    std::vector<double> radii(static_cast<std::size_t>(n_radial));
    const double dr = (outer_radius - inner_radius) / (n_radial - 1);
    for (int j = 0; j < n_radial; ++j) radii[static_cast<std::size_t>(j)] = inner_radius + j * dr;
    radii.back() = outer_radius;
    return std::shared_ptr<const PolarGrid>(
        new PolarGrid(Kind::Annulus, std::move(radii), n_angular, inner_radius));
}

std::shared_ptr<const PolarGrid> PolarGrid::make_annulus_with_radii(std::vector<double> radii, int n_angular) {
    if (radii.size() < kRadialStencilWidth) throw GridError("make_annulus_with_radii: need at least 6 radii");
    const double inner = radii.front();
    if (!(inner > 0.0)) throw GridError("make_annulus_with_radii: inner radius must be positive");
    return std::shared_ptr<const PolarGrid>(
        new PolarGrid(Kind::Annulus, std::move(radii), n_angular, inner));
}

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)), values_(grid_->node_count(), Complex{0.0, 0.0}) {}

GridFunction::GridFunction(GridPtr grid, std::vector<Complex> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->node_count()) throw GridError("GridFunction: value count does not match grid");
}

GridFunction GridFunction::sample(const GridPtr& grid, const std::function<Complex(Complex)>& f) {
    GridFunction out(grid);
    for (int j = 0; j < grid->n_radial(); ++j) {
        for (int k = 0; k < grid->n_angular(); ++k) {
            out.at(j, k) = f(grid->node(j, k));
        }
    }
    return out;
}

GridFunction GridFunction::constant(const GridPtr& grid, Complex value) {
    GridFunction out(grid);
    std::fill(out.values_.begin(), out.values_.end(), value);
    return out;
}

std::vector<Complex> GridFunction::boundary_trace() const {
    const int j = grid_->n_radial() - 1;
    std::vector<Complex> out(static_cast<std::size_t>(grid_->n_angular()));
    for (int k = 0; k < grid_->n_angular(); ++k) out[static_cast<std::size_t>(k)] = at(j, k);
    return out;
}

std::vector<Complex> GridFunction::inner_trace() const {
    std::vector<Complex> out(static_cast<std::size_t>(grid_->n_angular()));
    for (int k = 0; k < grid_->n_angular(); ++k) out[static_cast<std::size_t>(k)] = at(0, k);
    return out;
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (const Complex& v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::min_abs() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Complex& v : values_) m = std::min(m, std::abs(v));
    return m;
}

bool GridFunction::is_finite() const {
    for (const Complex& v : values_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

void GridFunction::require_finite(const char* context) const {
    if (!is_finite()) throw NonFiniteError(std::string("non-finite grid function in ") + context);
}

GridFunction& GridFunction::operator+=(const GridFunction& rhs) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& rhs) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(Complex s) {
    for (Complex& v : values_) v *= s;
    return *this;
}

GridFunction angular_derivative(const GridFunction& f) {
    const PolarGrid& g = f.grid();
    const FftPlan& plan = g.fft();
    const int na = g.n_angular();
    GridFunction out(f.grid_ptr());
    std::vector<Complex> row(static_cast<std::size_t>(na));
    for (int j = 0; j < g.n_radial(); ++j) {
        for (int k = 0; k < na; ++k) row[static_cast<std::size_t>(k)] = f.at(j, k);
        plan.forward(row.data());
        for (int k = 0; k < na; ++k) {
            const int m = plan.mode(static_cast<std::size_t>(k));
            row[static_cast<std::size_t>(k)] *= (m == -na / 2) ? Complex{0.0, 0.0} : Complex{0.0, static_cast<double>(m)};
        }
        plan.inverse(row.data());
        for (int k = 0; k < na; ++k) out.at(j, k) = row[static_cast<std::size_t>(k)];
    }
    return out;
}

GridFunction radial_derivative(const GridFunction& f) {
    const PolarGrid& g = f.grid();
    const int na = g.n_angular();
    GridFunction out(f.grid_ptr());
    for (int j = 0; j < g.n_radial(); ++j) {
        auto stencil = g.radial_stencil(j);
        for (int k = 0; k < na; ++k) {
            Complex s{0.0, 0.0};
            for (const RadialStencilEntry& e : stencil) {
                const int kk = (k + e.angular_shift) & (na - 1);
                s += e.weight * f.at(e.node, kk);
            }
            out.at(j, k) = s;
        }
    }
    return out;
}

double angular_tail_fraction(const GridFunction& f) {
    const PolarGrid& g = f.grid();
    const FftPlan& plan = g.fft();
    const int na = g.n_angular();
    const int cutoff = (7 * na) / 16;  // |m| ≥ cutoff counts as tail
    double total = 0.0, tail = 0.0;
    std::vector<Complex> row(static_cast<std::size_t>(na));
    for (int j = 0; j < g.n_radial(); ++j) {
        for (int k = 0; k < na; ++k) row[static_cast<std::size_t>(k)] = f.at(j, k);
        plan.forward(row.data());
        for (int k = 0; k < na; ++k) {
            const double e = std::norm(row[static_cast<std::size_t>(k)]);
            total += e;
            if (std::abs(plan.mode(static_cast<std::size_t>(k))) >= cutoff) tail += e;
        }
    }
    if (total < 1e-280) return 0.0;
    return tail / total;
}

namespace {

GridFunction wirtinger(const GridFunction& f, bool zbar, const DiffOptions& opts) {
    f.require_finite(zbar ? "d_zbar" : "d_z");
    if (opts.check_resolution) {
        const double tail = angular_tail_fraction(f);
        if (tail > opts.tail_threshold) {
            throw ResolutionError("spectral tail " + describe(tail) + " exceeds threshold " +
                                  describe(opts.tail_threshold) + "; grid too coarse for this field");
        }
    }
    const PolarGrid& g = f.grid();
    GridFunction fr = radial_derivative(f);
    GridFunction ft = angular_derivative(f);
    GridFunction out(f.grid_ptr());
    for (int j = 0; j < g.n_radial(); ++j) {
        const double r = g.radius(j);
        for (int k = 0; k < g.n_angular(); ++k) {
            const double th = g.theta(k);
            const Complex phase = zbar ? Complex{std::cos(th), std::sin(th)} : Complex{std::cos(th), -std::sin(th)};
            const Complex ang = Complex{0.0, 1.0} / r * ft.at(j, k);
            out.at(j, k) = 0.5 * phase * (zbar ? fr.at(j, k) + ang : fr.at(j, k) - ang);
        }
    }
    return out;
}

}  // namespace

GridFunction d_z(const GridFunction& f, const DiffOptions& opts) { return wirtinger(f, false, opts); }
GridFunction d_zbar(const GridFunction& f, const DiffOptions& opts) { return wirtinger(f, true, opts); }

Complex integrate(const GridFunction& f) {
    f.require_finite("integrate");
    const PolarGrid& g = f.grid();
    Complex acc{0.0, 0.0};
    for (int j = 0; j < g.n_radial(); ++j) {
        Complex row{0.0, 0.0};
        for (int k = 0; k < g.n_angular(); ++k) row += f.at(j, k);
        acc += g.quadrature_weight(j) * row;
    }
    return acc;
}

int winding_number(std::span<const Complex> curve) {
    if (curve.size() < 2) throw GridError("winding_number: need at least 2 samples");
    double total = 0.0;
    const double jump_cap = kPi * (1.0 - 1e-12);
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const Complex a = curve[k];
        const Complex b = curve[(k + 1) % curve.size()];
        if (std::abs(a) == 0.0 || std::abs(b) == 0.0)
            throw UndefinedWindingError("winding_number: curve touches zero");
        const double d = std::arg(b / a);
        if (std::abs(d) >= jump_cap)
            throw ResolutionError("winding_number: phase jump of " + describe(d) + " rad between samples");
        total += d;
    }
    return static_cast<int>(std::llround(total / (2.0 * kPi)));
}

GridFunction hadamard(const GridFunction& a, const GridFunction& b) {
    GridFunction out(a.grid_ptr());
    auto ov = out.values();
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    return out;
}

GridFunction map_values(const GridFunction& a, const std::function<Complex(Complex)>& f) {
    GridFunction out(a.grid_ptr());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(av[i]);
    return out;
}

std::vector<Complex> curve_derivative(std::span<const Complex> curve) {
    const std::size_t n = curve.size();
    FftPlan plan(n);
    std::vector<Complex> buf(curve.begin(), curve.end());
    plan.forward(buf.data());
    for (std::size_t k = 0; k < n; ++k) {
        const int m = plan.mode(k);
        buf[k] *= (m == -static_cast<int>(n) / 2) ? Complex{0.0, 0.0} : Complex{0.0, static_cast<double>(m)};
    }
    plan.inverse(buf.data());
    return buf;
}

}  // namespace discfill
