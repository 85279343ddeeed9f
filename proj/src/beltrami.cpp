#include "discfill/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace discfill {

namespace {

constexpr int kPanelNodes = 6;  // quintic interpolation per radial panel

// Coefficients of the degree-(N−1) interpolant through (x_i, v_i) in the
// monomial basis: c_q = sum_i inv[q*N+i] v_i.
void vandermonde_inverse(const double* xs, int n, double* inv) {
    constexpr int kMax = 8;
    double m[kMax][2 * kMax];
    for (int i = 0; i < n; ++i) {
        double p = 1.0;
        for (int q = 0; q < n; ++q) {
            m[i][q] = p;
            p *= xs[i];
        }
        for (int q = n; q < 2 * n; ++q) m[i][q] = (q - n == i) ? 1.0 : 0.0;
    }
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (piv != c)
            for (int j = 0; j < 2 * n; ++j) std::swap(m[c][j], m[piv][j]);
        const double d = m[c][c];
        for (int j = 0; j < 2 * n; ++j) m[c][j] /= d;
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = m[r][c];
            if (f == 0.0) continue;
            for (int j = 0; j < 2 * n; ++j) m[r][j] -= f * m[c][j];
        }
    }
    for (int q = 0; q < n; ++q)
        for (int i = 0; i < n; ++i) inv[q * n + i] = m[q][i + n];
}

// 20-point Gauss-Legendre nodes/weights on [0, 1].
struct Gauss20 {
    double x[20];
    double w[20];
    Gauss20() {
        // Newton iteration on Legendre polynomials.
        for (int i = 0; i < 10; ++i) {
            double t = std::cos(std::numbers::pi * (i + 0.75) / 20.5);
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int n = 2; n <= 20; ++n) {
                    const double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = 20.0 * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            double p0 = 1.0, p1 = t;
            for (int n = 2; n <= 20; ++n) {
                const double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            const double dp = 20.0 * (t * p1 - p0) / (t * t - 1.0);
            const double wq = 2.0 / ((1.0 - t * t) * dp * dp);
            x[i] = 0.5 * (1.0 - t);
            w[i] = 0.5 * wq;
            x[19 - i] = 0.5 * (1.0 + t);
            w[19 - i] = 0.5 * wq;
        }
    }
};

const Gauss20& gauss20() {
    static const Gauss20 g;
    return g;
}

// Scaled panel moments S_q = ∫_ρ^1 τ^q κ(x) dx with τ = (x−1)/(1−ρ);
// κ = (ρ/x)^m inward (m ≥ 0) or x^K outward (K ≥ 1). Every intermediate is
// bounded: small exponents go through Gauss quadrature, large ones through
// a forward recurrence whose divisors grow with the exponent.
void scaled_moments(double rho, int m_signed, int count, double* out) {
    const double delta = 1.0 - rho;
    if (m_signed >= 0 && m_signed <= 7) {
        const Gauss20& g = gauss20();
        for (int q = 0; q < count; ++q) {
            double s = 0.0;
            for (int i = 0; i < 20; ++i) {
                const double x = rho + delta * g.x[i];
                const double tau = (x - 1.0) / delta;
                s += g.w[i] * std::pow(tau, q) * std::pow(rho / x, m_signed);
            }
            out[q] = s * delta;
        }
        return;
    }
    double prev = 0.0;
    if (m_signed > 7) {
        const int m = m_signed;
        prev = (std::pow(rho, m) - rho) / (1.0 - m);  // Ĩ_0
        out[0] = prev;
        double neg_delta_pow = 1.0;  // (−δ)^q
        for (int q = 1; q < count; ++q) {
            neg_delta_pow *= -delta;
            const double cur = (-neg_delta_pow * rho - q * prev) / static_cast<double>(q + 1 - m);
            out[q] = cur;
            prev = cur;
        }
    } else {
        const int k = -m_signed;
        const double rho_k1 = std::pow(rho, k + 1);
        prev = (1.0 - rho_k1) / static_cast<double>(k + 1);  // J_0
        out[0] = prev;
        double neg_delta_pow = 1.0;
        for (int q = 1; q < count; ++q) {
            neg_delta_pow *= -delta;
            const double cur = (-neg_delta_pow * rho_k1 - q * prev) / static_cast<double>(q + k + 1);
            out[q] = cur;
            prev = cur;
        }
    }
    // Rescale from the (x−1)-basis to the τ-basis.
    double dq = 1.0;
    for (int q = 1; q < count; ++q) {
        dq *= delta;
        out[q] /= dq;
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

CauchyGreen::CauchyGreen(GridPtr grid) : grid_(std::move(grid)) {
    na_ = grid_->n_angular();
    nr_ = grid_->n_radial();
    const auto& radii = grid_->radii();
    const int panels = nr_ - 1;
    constexpr int pn = kPanelNodes;

    // Interpolation nodes are expressed in the panel-local variable
    // τ = (x − 1)/(1 − ρ), x = s/r_hi, which keeps the Vandermonde solves
    // well conditioned on clustered radial nodes.
    panel_base_.resize(static_cast<std::size_t>(panels));
    std::vector<std::array<double, pn * pn>> vinv(static_cast<std::size_t>(panels));
    for (int p = 0; p < panels; ++p) {
        const int base = std::clamp(p - 2, 0, nr_ - pn);
        panel_base_[static_cast<std::size_t>(p)] = base;
        const double r_hi = radii[static_cast<std::size_t>(p) + 1];
        const double rho = radii[static_cast<std::size_t>(p)] / r_hi;
        const double delta = 1.0 - rho;
        double taus[pn];
        for (int i = 0; i < pn; ++i)
            taus[i] = (radii[static_cast<std::size_t>(base + i)] / r_hi - 1.0) / delta;
        vandermonde_inverse(taus, pn, vinv[static_cast<std::size_t>(p)].data());
    }

    panel_weights_.assign(static_cast<std::size_t>(na_) * panels * pn, 0.0);
    propagation_.assign(static_cast<std::size_t>(na_) * panels, 0.0);

    for (int km = 0; km < na_; ++km) {
        const int m = grid_->fft().mode(static_cast<std::size_t>(km));
        for (int p = 0; p < panels; ++p) {
            const double r_lo = radii[static_cast<std::size_t>(p)];
            const double r_hi = radii[static_cast<std::size_t>(p) + 1];
            const double rho = r_lo / r_hi;
            double moments[pn];
            scaled_moments(rho, m, pn, moments);
            propagation_[pi(km, p)] = std::pow(rho, m >= 0 ? m : -m);
            for (int i = 0; i < pn; ++i) {
                double w = 0.0;
                for (int q = 0; q < pn; ++q)
                    w += vinv[static_cast<std::size_t>(p)][static_cast<std::size_t>(q * pn + i)] * moments[q];
                panel_weights_[wi(km, p, i)] = r_hi * w;
            }
        }
    }

    if (grid_->is_disc()) {
        // Segment [0, r_0] for outward modes: extrapolation from the first
        // nodes, exact moments ∫_0^1 x^{q+K} dx = 1/(q+K+1).
        const double r0 = radii[0];
        double xs[pn];
        for (int i = 0; i < pn; ++i) xs[i] = radii[static_cast<std::size_t>(i)] / r0;
        double inv[pn * pn];
        vandermonde_inverse(xs, pn, inv);
        const int kmax = na_ / 2;
        origin_weights_.assign(static_cast<std::size_t>(kmax + 1) * pn, 0.0);
        for (int k = 1; k <= kmax; ++k) {
            for (int i = 0; i < pn; ++i) {
                double w = 0.0;
                for (int q = 0; q < pn; ++q) w += inv[q * pn + i] / static_cast<double>(q + k + 1);
                origin_weights_[static_cast<std::size_t>(k) * pn + static_cast<std::size_t>(i)] = r0 * w;
            }
        }
    }
}

GridFunction CauchyGreen::apply(const GridFunction& g) const {
    g.require_finite("cauchy_green");
    const FftPlan& plan = grid_->fft();
    const int na = na_;
    const int nr = nr_;
    const int panels = nr - 1;

    std::vector<Complex> modes(static_cast<std::size_t>(nr) * na);
    {
        std::vector<Complex> row(static_cast<std::size_t>(na));
        for (int j = 0; j < nr; ++j) {
            for (int k = 0; k < na; ++k) row[static_cast<std::size_t>(k)] = g.at(j, k);
            plan.forward(row.data());
            for (int k = 0; k < na; ++k) modes[static_cast<std::size_t>(j) * na + k] = row[static_cast<std::size_t>(k)];
        }
    }

    std::vector<Complex> out_modes(static_cast<std::size_t>(nr) * na, Complex{0.0, 0.0});
    std::vector<Complex> profile(static_cast<std::size_t>(nr));
    std::vector<Complex> u(static_cast<std::size_t>(nr));

    for (int km = 0; km < na; ++km) {
        const int m = plan.mode(static_cast<std::size_t>(km));
        const int n = m + 1;  // input mode feeding output mode m
        if (n >= na / 2) continue;
        const int kn = n >= 0 ? n : n + na;

        for (int j = 0; j < nr; ++j) profile[static_cast<std::size_t>(j)] = modes[static_cast<std::size_t>(j) * na + kn];

        if (m >= 0) {
            u[static_cast<std::size_t>(nr - 1)] = Complex{0.0, 0.0};
            for (int p = panels - 1; p >= 0; --p) {
                const int base = panel_base_[static_cast<std::size_t>(p)];
                Complex integral{0.0, 0.0};
                for (int i = 0; i < kPanelNodes; ++i)
                    integral += panel_weights_[wi(km, p, i)] * profile[static_cast<std::size_t>(base + i)];
                u[static_cast<std::size_t>(p)] = propagation_[pi(km, p)] * u[static_cast<std::size_t>(p) + 1] -
                                                 2.0 * integral;
            }
        } else {
            const int kpow = -m;
            Complex start{0.0, 0.0};
            if (grid_->is_disc() && kpow <= na / 2) {
                for (int i = 0; i < kPanelNodes; ++i)
                    start += origin_weights_[static_cast<std::size_t>(kpow) * kPanelNodes +
                                             static_cast<std::size_t>(i)] *
                             profile[static_cast<std::size_t>(i)];
                start *= 2.0;
            }
            u[0] = start;
            for (int p = 0; p < panels; ++p) {
                const int base = panel_base_[static_cast<std::size_t>(p)];
                Complex integral{0.0, 0.0};
                for (int i = 0; i < kPanelNodes; ++i)
                    integral += panel_weights_[wi(km, p, i)] * profile[static_cast<std::size_t>(base + i)];
                u[static_cast<std::size_t>(p) + 1] = propagation_[pi(km, p)] * u[static_cast<std::size_t>(p)] +
                                                     2.0 * integral;
            }
        }
        for (int j = 0; j < nr; ++j) out_modes[static_cast<std::size_t>(j) * na + km] = u[static_cast<std::size_t>(j)];
    }

    GridFunction result(grid_);
    {
        std::vector<Complex> row(static_cast<std::size_t>(na));
        for (int j = 0; j < nr; ++j) {
            for (int k = 0; k < na; ++k) row[static_cast<std::size_t>(k)] = out_modes[static_cast<std::size_t>(j) * na + k];
            plan.inverse(row.data());
            for (int k = 0; k < na; ++k) result.at(j, k) = row[static_cast<std::size_t>(k)];
        }
    }
    return result;
}

GridFunction cauchy_green(const GridFunction& g) { return CauchyGreen(g.grid_ptr()).apply(g); }

BoundaryCondition BoundaryCondition::none() { return BoundaryCondition(); }

BoundaryCondition BoundaryCondition::dirichlet(std::vector<Complex> outer_trace) {
    BoundaryCondition bc;
    bc.kind_ = Kind::Dirichlet;
    bc.outer_trace_ = std::move(outer_trace);
    return bc;
}

BoundaryCondition BoundaryCondition::dirichlet_annulus(std::vector<Complex> outer_trace,
                                                       std::vector<Complex> inner_trace) {
    BoundaryCondition bc;
    bc.kind_ = Kind::Dirichlet;
    bc.outer_trace_ = std::move(outer_trace);
    bc.inner_trace_ = std::move(inner_trace);
    return bc;
}

BoundaryCondition BoundaryCondition::re_trace(std::vector<double> outer_re, double im_at_one) {
    BoundaryCondition bc;
    bc.kind_ = Kind::ReTrace;
    bc.outer_re_ = std::move(outer_re);
    bc.im_at_one_ = im_at_one;
    return bc;
}

BeltramiProblem::BeltramiProblem(GridFunction q_field, GridFunction rhs) : q(std::move(q_field)), Q(std::move(rhs)) {
    q.require_finite("BeltramiProblem.q");
    Q.require_finite("BeltramiProblem.Q");
    q_bound = q.max_abs();
    Q_bound = Q.max_abs();
    if (q_bound >= 1.0) {
        throw EllipticityError("BeltramiProblem: max |q| = " + fmt(q_bound) + " violates |q| ≤ q0 < 1");
    }
}

GridFunction schwarz_extension(const GridPtr& disc, std::span<const double> boundary_re, double im_at_one) {
    if (!disc->is_disc()) throw BeltramiError("schwarz_extension: disc grid required");
    const int na = disc->n_angular();
    const int nr = disc->n_radial();
    if (static_cast<int>(boundary_re.size()) != na) throw BeltramiError("schwarz_extension: trace length mismatch");
    const FftPlan& plan = disc->fft();

    std::vector<Complex> coef(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) coef[static_cast<std::size_t>(k)] = Complex{boundary_re[static_cast<std::size_t>(k)], 0.0};
    plan.forward(coef.data());
    for (auto& c : coef) c /= static_cast<double>(na);

    GridFunction h(disc);
    std::vector<Complex> row(static_cast<std::size_t>(na));
    for (int j = 0; j < nr; ++j) {
        const double r = disc->radius(j);
        std::fill(row.begin(), row.end(), Complex{0.0, 0.0});
        row[0] = coef[0];  // c_0 is real for real data
        double rm = r;
        for (int mpos = 1; mpos < na / 2; ++mpos) {
            row[static_cast<std::size_t>(mpos)] = 2.0 * coef[static_cast<std::size_t>(mpos)] * rm;
            rm *= r;
        }
        plan.inverse(row.data());
        // inverse() scales by 1/na, but the coefficients are already scaled.
        for (int k = 0; k < na; ++k) h.at(j, k) = row[static_cast<std::size_t>(k)] * static_cast<double>(na);
    }
    const Complex at_one = h.at(nr - 1, 0);
    const Complex shift{0.0, im_at_one - at_one.imag()};
    for (auto& v : h.values()) v += shift;
    return h;
}

GridFunction analytic_completion(const GridPtr& grid, std::span<const Complex> outer_values,
                                 std::span<const Complex> inner_values) {
    const int na = grid->n_angular();
    const int nr = grid->n_radial();
    if (static_cast<int>(outer_values.size()) != na) throw BeltramiError("analytic_completion: trace length mismatch");
    const FftPlan& plan = grid->fft();

    std::vector<Complex> outer(outer_values.begin(), outer_values.end());
    plan.forward(outer.data());
    for (auto& c : outer) c /= static_cast<double>(na);

    std::vector<Complex> inner;
    const bool two_sided = !inner_values.empty();
    if (two_sided) {
        if (static_cast<int>(inner_values.size()) != na)
            throw BeltramiError("analytic_completion: inner trace length mismatch");
        inner.assign(inner_values.begin(), inner_values.end());
        plan.forward(inner.data());
        for (auto& c : inner) c /= static_cast<double>(na);
    }

    const double r_out = grid->outer_radius();
    const double r_in = grid->is_disc() ? 0.0 : grid->radii().front();
    const double ratio = r_in / r_out;

    GridFunction h(grid);
    std::vector<Complex> row(static_cast<std::size_t>(na));
    for (int j = 0; j < nr; ++j) {
        const double r = grid->radius(j);
        std::fill(row.begin(), row.end(), Complex{0.0, 0.0});
        for (int k = 0; k < na; ++k) {
            const int m = plan.mode(static_cast<std::size_t>(k));
            if (m == -na / 2) continue;
            if (!two_sided) {
                if (m < 0) continue;  // disc: analytic projection
                row[static_cast<std::size_t>(k)] = outer[static_cast<std::size_t>(k)] * std::pow(r / r_out, m);
            } else {
                if (m >= 0) {
                    // α = a_m r_out^m from least squares of both traces.
                    const double p = std::pow(ratio, m);
                    const Complex alpha =
                        (p * inner[static_cast<std::size_t>(k)] + outer[static_cast<std::size_t>(k)]) / (p * p + 1.0);
                    row[static_cast<std::size_t>(k)] = alpha * std::pow(r / r_out, m);
                } else {
                    const int mm = -m;
                    const double p = std::pow(ratio, mm);
                    const Complex beta =
                        (p * outer[static_cast<std::size_t>(k)] + inner[static_cast<std::size_t>(k)]) / (p * p + 1.0);
                    row[static_cast<std::size_t>(k)] = beta * std::pow(r_in / r, mm);
                }
            }
        }
        plan.inverse(row.data());
        for (int k = 0; k < na; ++k) h.at(j, k) = row[static_cast<std::size_t>(k)] * static_cast<double>(na);
    }
    return h;
}

GridFunction beltrami_residual_field(const GridFunction& w, const GridFunction& q, const GridFunction& Q) {
    DiffOptions raw;
    raw.check_resolution = false;
    GridFunction res = d_zbar(w, raw);
    GridFunction wz = d_z(w, raw);
    auto rv = res.values();
    auto zv = wz.values();
    auto qv = q.values();
    auto Qv = Q.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= qv[i] * zv[i] + Qv[i];
    return res;
}

namespace {

GridFunction boundary_correction(const BoundaryCondition& bc, const GridFunction& particular) {
    const GridPtr& grid = particular.grid_ptr();
    const int na = grid->n_angular();
    switch (bc.kind()) {
        case BoundaryCondition::Kind::None:
            return GridFunction(grid);
        case BoundaryCondition::Kind::Dirichlet: {
            std::vector<Complex> outer_defect = particular.boundary_trace();
            for (int k = 0; k < na; ++k)
                outer_defect[static_cast<std::size_t>(k)] =
                    bc.outer_trace()[static_cast<std::size_t>(k)] - outer_defect[static_cast<std::size_t>(k)];
            if (bc.inner_trace().empty()) {
                return analytic_completion(grid, outer_defect);
            }
            std::vector<Complex> inner_defect = particular.inner_trace();
            for (int k = 0; k < na; ++k)
                inner_defect[static_cast<std::size_t>(k)] =
                    bc.inner_trace()[static_cast<std::size_t>(k)] - inner_defect[static_cast<std::size_t>(k)];
            return analytic_completion(grid, outer_defect, inner_defect);
        }
        case BoundaryCondition::Kind::ReTrace: {
            if (!grid->is_disc()) throw BeltramiError("ReTrace boundary condition requires a disc grid");
            std::vector<Complex> outer = particular.boundary_trace();
            std::vector<double> defect(static_cast<std::size_t>(na));
            for (int k = 0; k < na; ++k)
                defect[static_cast<std::size_t>(k)] =
                    bc.outer_re()[static_cast<std::size_t>(k)] - outer[static_cast<std::size_t>(k)].real();
            const double im_target = bc.im_at_one() - particular.at(grid->n_radial() - 1, 0).imag();
            return schwarz_extension(grid, defect, im_target);
        }
    }
    throw BeltramiError("boundary_correction: unreachable");
}

}  // namespace

BeltramiSolution solve_beltrami(const BeltramiProblem& p, const BoundaryCondition& bc, const CauchyGreen& transform,
                                const SolveOptions& opts, const GridFunction* warm_start) {
    if (bc.kind() == BoundaryCondition::Kind::Dirichlet &&
        static_cast<int>(bc.outer_trace().size()) != p.q.grid().n_angular()) {
        throw BeltramiError("solve_beltrami: boundary trace length mismatch");
    }
    const GridPtr& grid = p.q.grid_ptr();
    DiffOptions raw;
    raw.check_resolution = false;

    GridFunction w = warm_start ? *warm_start : GridFunction(grid);
    GridFunction best = w;
    double best_res = std::numeric_limits<double>::infinity();
    double relaxation = 1.0;

    BeltramiSolution sol{GridFunction(grid), 0.0, 0, {}};
    sol.residual_history.reserve(static_cast<std::size_t>(opts.max_iterations));

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        GridFunction rhs = hadamard(p.q, d_z(w, raw));
        rhs += p.Q;
        GridFunction particular = transform.apply(rhs);
        GridFunction w_next = particular + boundary_correction(bc, particular);
        if (relaxation < 1.0) {
            auto nv = w_next.values();
            auto wv = w.values();
            for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = wv[i] + relaxation * (nv[i] - wv[i]);
        }
        w_next.require_finite("solve_beltrami iterate");

        const double res = beltrami_residual_field(w_next, p.q, p.Q).max_abs();
        sol.residual_history.push_back(res);
        sol.iterations = iter;
        w = w_next;

        if (res < best_res) {
            best_res = res;
            best = w;
        }
        if (res < opts.tolerance) {
            sol.w = std::move(w);
            sol.residual_norm = res;
            sol.reached_tolerance = true;
            return sol;
        }
        // Growth control: restart from the best iterate with more damping.
        if (res > 4.0 * best_res && sol.residual_history.size() >= 2) {
            if (relaxation <= opts.min_relaxation) {
                throw DivergenceError("solve_beltrami: residual growing (last " + fmt(res) + ", best " +
                                      fmt(best_res) + ") at minimum relaxation");
            }
            relaxation *= 0.5;
            w = best;
        }
        // Stagnation: no meaningful progress across a window.
        const std::size_t n = sol.residual_history.size();
        if (opts.stop_at_floor && n >= 8 && res > 0.98 * sol.residual_history[n - 6]) {
            sol.w = std::move(best);
            sol.residual_norm = best_res;
            sol.reached_tolerance = false;
            return sol;
        }
        if (n >= 25) {
            const double old = sol.residual_history[n - 25];
            if (res > 0.98 * old) {
                throw DivergenceError("solve_beltrami: stagnation, residual " + fmt(res) + " after " +
                                      std::to_string(iter) + " sweeps (q0 = " + fmt(p.q_bound) + ")");
            }
        }
    }
    if (opts.stop_at_floor) {
        sol.w = std::move(best);
        sol.residual_norm = best_res;
        sol.reached_tolerance = false;
        return sol;
    }
    throw DivergenceError("solve_beltrami: no convergence within " + std::to_string(opts.max_iterations) +
                          " sweeps, best residual " + fmt(best_res));
}

BeltramiSolution solve_beltrami(const BeltramiProblem& p, const BoundaryCondition& bc, const SolveOptions& opts) {
    CauchyGreen transform(p.q.grid_ptr());
    return solve_beltrami(p, bc, transform, opts, nullptr);
}

ReflectedFields reflect_extend(const GridFunction& w, const GridFunction& q, const GridFunction& Q,
                               double boundary_tol) {
    const GridPtr& grid = w.grid_ptr();
    if (grid->is_disc() || std::abs(grid->outer_radius() - 1.0) > 1e-12) {
        throw HypothesisError("reflect_extend: annulus grid with outer radius 1 required");
    }
    const int nr = grid->n_radial();
    const int na = grid->n_angular();

    const double min_w = w.min_abs();
    const double max_w = w.max_abs();
    if (!(min_w > 0.0)) throw HypothesisError("reflect_extend: |w| must stay away from 0 on the annulus");
    for (int k = 0; k < na; ++k) {
        const double dev = std::abs(std::abs(w.at(nr - 1, k)) - 1.0);
        if (dev > boundary_tol) {
            throw HypothesisError("reflect_extend: |w| deviates from 1 on the circle by " + fmt(dev));
        }
    }

    std::vector<double> radii = grid->radii();
    radii.reserve(static_cast<std::size_t>(2 * nr - 1));
    for (int j = nr - 2; j >= 0; --j) radii.push_back(1.0 / grid->radius(j));
    GridPtr doubled = PolarGrid::make_annulus_with_radii(std::move(radii), na);

    ReflectedFields out{doubled, GridFunction(doubled), GridFunction(doubled), GridFunction(doubled), 0.0, 0.0, 0.0, 0.0};
    for (int j = 0; j < nr; ++j) {
        for (int k = 0; k < na; ++k) {
            out.w.at(j, k) = w.at(j, k);
            out.q.at(j, k) = q.at(j, k);
            out.Q.at(j, k) = Q.at(j, k);
        }
    }
    for (int jj = nr; jj < 2 * nr - 1; ++jj) {
        const int j = 2 * (nr - 1) - jj;  // source node on the inner half
        for (int k = 0; k < na; ++k) {
            const double th = grid->theta(k);
            const Complex zstar = std::polar(grid->radius(j), th);
            const Complex phase4 = std::polar(1.0, 4.0 * th);  // z² (z*)² on reflected radii
            const Complex wr = 1.0 / std::conj(w.at(j, k));
            out.w.at(jj, k) = wr;
            out.q.at(jj, k) = std::conj(q.at(j, k)) * phase4;
            out.Q.at(jj, k) = std::conj(Q.at(j, k)) * zstar * zstar * wr * wr;
        }
    }
    out.w.require_finite("reflect_extend.w");

    out.epsilon = std::min(min_w, 1.0 / max_w);
    out.q_bound = out.q.max_abs();
    out.Q_bound = out.Q.max_abs();

    // Residual of the extended equation, checked on the reflected half with
    // stencils confined to it: w is only continuous across the circle and
    // the coefficients may jump there, so derivatives must not straddle it.
    {
        std::vector<double> outer_radii(doubled->radii().begin() + (nr - 1), doubled->radii().end());
        GridPtr outer_grid = PolarGrid::make_annulus_with_radii(std::move(outer_radii), na);
        GridFunction ow(outer_grid), oq(outer_grid), oQ(outer_grid);
        for (int j = 0; j < outer_grid->n_radial(); ++j) {
            for (int k = 0; k < na; ++k) {
                ow.at(j, k) = out.w.at(nr - 1 + j, k);
                oq.at(j, k) = out.q.at(nr - 1 + j, k);
                oQ.at(j, k) = out.Q.at(nr - 1 + j, k);
            }
        }
        // The circle layer carries the inner-side coefficients; skip it.
        GridFunction defect = beltrami_residual_field(ow, oq, oQ);
        double worst = 0.0;
        for (int j = 1; j < outer_grid->n_radial(); ++j)
            for (int k = 0; k < na; ++k) worst = std::max(worst, std::abs(defect.at(j, k)));
        out.outer_residual = worst;
    }
    return out;
}

double holder_monitor(const GridFunction& w, double alpha, double delta_prime, std::size_t pair_budget) {
    const PolarGrid& g = w.grid();
    const double inner = 1.0 - delta_prime;
    std::vector<std::pair<Complex, Complex>> nodes;  // (position, value)
    for (int j = 0; j < g.n_radial(); ++j) {
        if (g.radius(j) < inner - 1e-12) continue;
        for (int k = 0; k < g.n_angular(); ++k) nodes.emplace_back(g.node(j, k), w.at(j, k));
    }
    const std::size_t n = nodes.size();
    if (n < 2) return 0.0;
    std::size_t stride = 1;
    while ((n / stride) * (n / stride) > 2 * pair_budget) ++stride;
    double worst = 0.0;
    for (std::size_t a = 0; a < n; a += stride) {
        for (std::size_t b = a + stride; b < n; b += stride) {
            const double dist = std::abs(nodes[a].first - nodes[b].first);
            if (dist < 1e-14) continue;
            const double quot = std::abs(nodes[a].second - nodes[b].second) / std::pow(dist, alpha);
            worst = std::max(worst, quot);
        }
    }
    return worst;
}

}  // namespace discfill
