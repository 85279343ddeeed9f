#include "discfill/attach.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace discfill {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// Coefficient fields of the graph equation along a candidate graph, with
// the z ↦ Rz rescaling folded in.
void sample_coefficients(const TriangularStructure& T, double R, const GridFunction& w, GridFunction& q_out,
                         GridFunction& Q_out) {
    const PolarGrid& g = w.grid();
    for (int j = 0; j < g.n_radial(); ++j) {
        for (int k = 0; k < g.n_angular(); ++k) {
            const Complex z = R * g.node(j, k);
            const Complex wv = w.at(j, k);
            q_out.at(j, k) = -T.a(z, wv);
            Q_out.at(j, k) = R * T.b(z, wv) / wv;
        }
    }
}

}  // namespace

double totally_real_margin(const TorusTarget& target, const AlmostComplexStructure& J, int samples) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / samples;
        for (int l = 0; l < samples / 4; ++l) {
            const double psi = 2.0 * std::numbers::pi * l / (samples / 4);
            const Point2c p{std::polar(target.R, phi), std::polar(target.t, psi)};
            // Tangent plane of the torus at p.
            const Vec4 t1{-target.R * std::sin(phi), target.R * std::cos(phi), 0.0, 0.0};
            const Vec4 t2{0.0, 0.0, -target.t * std::sin(psi), target.t * std::cos(psi)};
            const Mat4 j = J.structure_at(p);
            const Vec4 jt1 = j.apply(t1);
            const Vec4 jt2 = j.apply(t2);
            Mat4 frame;
            for (int r = 0; r < 4; ++r) {
                frame.m[r][0] = t1[static_cast<std::size_t>(r)];
                frame.m[r][1] = t2[static_cast<std::size_t>(r)];
                frame.m[r][2] = jt1[static_cast<std::size_t>(r)];
                frame.m[r][3] = jt2[static_cast<std::size_t>(r)];
            }
            worst = std::min(worst, std::abs(frame.det()));
        }
    }
    return worst;
}

double graph_residual(const TriangularStructure& T, const TorusTarget& target, const GridFunction& w) {
    GridFunction q(w.grid_ptr()), Q(w.grid_ptr());
    sample_coefficients(T, target.R, w, q, Q);
    // Residual of w_z̄ = q w_z + Q·w (the logarithmic form multiplies b by
    // 1/w); undo the 1/w to report the plain graph residual.
    DiffOptions raw;
    raw.check_resolution = false;
    GridFunction wzb = d_zbar(w, raw);
    GridFunction wz = d_z(w, raw);
    double worst = 0.0;
    for (std::size_t i = 0; i < wzb.size(); ++i) {
        const Complex defect = wzb.values()[i] - q.values()[i] * wz.values()[i] - Q.values()[i] * w.values()[i];
        worst = std::max(worst, std::abs(defect));
    }
    return worst;
}

DiscSolution attach_disc(const TriangularStructure& T, const TorusTarget& target, double tau, const GridPtr& grid,
                         const AttachOptions& opts, const GridFunction* w_init) {
    if (!grid->is_disc()) throw AttachError("attach_disc: disc grid required");
    if (!(target.t > 0.0 && target.t <= 1.0)) throw AttachError("attach_disc: torus level t must lie in (0, 1]");
    const int na = grid->n_angular();
    const int nr = grid->n_radial();
    const Complex anchor = std::polar(target.t, tau);

    // Seed in the logarithmic variable u = log(w / (t e^{iτ})).
    GridFunction u(grid);
    if (w_init) {
        if (w_init->min_abs() <= 0.0) throw DegeneracyError("attach_disc: seed touches w = 0");
        if (winding_number(w_init->boundary_trace()) != 0)
            throw HomotopyClassError("attach_disc: seed boundary winding is not zero");
        for (int j = 0; j < nr; ++j)
            for (int k = 0; k < na; ++k) u.at(j, k) = std::log(w_init->at(j, k) / anchor);
    }

    CauchyGreen transform(grid);
    const std::vector<double> re_zero(static_cast<std::size_t>(na), 0.0);
    const BoundaryCondition bc = BoundaryCondition::re_trace(re_zero, 0.0);

    auto w_of = [&](const GridFunction& uu) {
        GridFunction w(grid);
        for (std::size_t i = 0; i < w.size(); ++i) w.values()[i] = anchor * std::exp(uu.values()[i]);
        return w;
    };

    GridFunction w = w_of(u);

    DiscSolution out{GridFunction(grid), target.R, target.t, tau, 0.0, 0.0, 0.0, 0, 0.0, 0.0, 0};
    GridFunction q(grid), Q(grid);

    int iter = 0;
    double step = std::numeric_limits<double>::infinity();
    double best_step = step;
    double damping = 1.0;
    while (iter < opts.max_picard) {
        ++iter;
        sample_coefficients(T, target.R, w, q, Q);
        const double q_max = q.max_abs();
        if (q_max >= 1.0) {
            throw AttachFailure("attach_disc: |a| reached " + fmt(q_max) + " along the iterate (taming lost)",
                                graph_residual(T, target, w));
        }

        SolveOptions inner = opts.inner;
        if (std::isfinite(step)) inner.tolerance = std::max(inner.tolerance, 1e-3 * step);
        inner.stop_at_floor = true;
        BeltramiSolution lin = solve_beltrami(BeltramiProblem(q, Q), bc, transform, inner, &u);

        double raw_step = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            raw_step = std::max(raw_step, std::abs(lin.w.values()[i] - u.values()[i]));
        step = damping * raw_step;
        out.step_history.push_back(step);

        for (std::size_t i = 0; i < u.size(); ++i)
            u.values()[i] += damping * (lin.w.values()[i] - u.values()[i]);
        w = w_of(u);

        if (step < opts.step_tolerance) break;
        if (step < best_step) {
            best_step = step;
        } else if (step > 8.0 * best_step) {
            // The contraction is lost; damp the update and try again.
            if (damping <= opts.min_damping) {
                throw AttachFailure("attach_disc: Picard increments growing (step " + fmt(step) + ")",
                                    graph_residual(T, target, w));
            }
            damping *= 0.5;
            best_step = step;
        }
    }
    if (step >= opts.step_tolerance) {
        throw AttachFailure("attach_disc: Picard increment " + fmt(step) + " after " + std::to_string(iter) +
                            " sweeps", graph_residual(T, target, w));
    }

    const double res = graph_residual(T, target, w);
    if (res > opts.residual_cap) {
        throw AttachFailure("attach_disc: converged iterate has residual " + fmt(res) +
                            " above the configured cap", res);
    }

    out.w = std::move(w);
    out.picard_iterations = iter;
    out.residual_norm = res;
    out.min_abs_w = out.w.min_abs();
    out.max_abs_w = out.w.max_abs();
    double bdev = 0.0;
    for (int k = 0; k < na; ++k) bdev = std::max(bdev, std::abs(std::abs(out.w.at(nr - 1, k)) - target.t));
    out.boundary_deviation = bdev;
    out.normalization_error = std::abs(out.w.at(nr - 1, 0) - anchor);
    out.winding = winding_number(out.w.boundary_trace());
    return out;
}

DiscCheckReport verify_admissible_disc(const DiscSolution& s, const TorusTarget& target, double boundary_tol,
                                       double normalization_tol) {
    DiscCheckReport rep;
    const PolarGrid& g = s.w.grid();
    const int nr = g.n_radial();
    const int na = g.n_angular();

    double bdev = 0.0;
    for (int k = 0; k < na; ++k) bdev = std::max(bdev, std::abs(std::abs(s.w.at(nr - 1, k)) - target.t));
    rep.boundary_deviation = bdev;
    rep.boundary_ok = bdev < boundary_tol;

    rep.winding = winding_number(s.w.boundary_trace());
    rep.winding_ok = rep.winding == 0;

    rep.normalization_error = std::abs(s.w.at(nr - 1, 0) - std::polar(target.t, s.tau));
    rep.normalization_ok = rep.normalization_error < normalization_tol;

    rep.min_abs_w = s.w.min_abs();
    rep.nonvanishing_ok = rep.min_abs_w > 0.0;

    // Graphs over distinct z-nodes are distinct points; the separation is
    // bounded below by the z-distance of neighbouring nodes.
    rep.embedding_separation = target.R * std::min(g.radial_spacing(), g.radius(0) * g.theta(1));
    rep.pass = rep.boundary_ok && rep.winding_ok && rep.normalization_ok && rep.nonvanishing_ok &&
               rep.embedding_separation > 0.0;
    return rep;
}

GridFunction interpolate_to(const GridFunction& f, const GridPtr& target) {
    const PolarGrid& src = f.grid();
    const PolarGrid& dst = *target;
    if (src.is_disc() != dst.is_disc()) throw GridError("interpolate_to: grid kinds differ");
    if (std::abs(src.outer_radius() - dst.outer_radius()) > 1e-12)
        throw GridError("interpolate_to: outer radii differ");
    const int na_s = src.n_angular();
    const int na_d = dst.n_angular();
    if (na_d % na_s != 0) throw GridError("interpolate_to: target angular count must be a multiple of the source");

    // Angular refinement by zero-padding the spectrum at each source radius.
    const int nr_s = src.n_radial();
    std::vector<Complex> dense(static_cast<std::size_t>(nr_s) * na_d, Complex{0.0, 0.0});
    {
        const FftPlan& plan_s = src.fft();
        FftPlan plan_d(static_cast<std::size_t>(na_d));
        std::vector<Complex> row(static_cast<std::size_t>(na_s));
        std::vector<Complex> wide(static_cast<std::size_t>(na_d));
        for (int j = 0; j < nr_s; ++j) {
            for (int k = 0; k < na_s; ++k) row[static_cast<std::size_t>(k)] = f.at(j, k);
            plan_s.forward(row.data());
            std::fill(wide.begin(), wide.end(), Complex{0.0, 0.0});
            for (int k = 0; k < na_s; ++k) {
                const int m = plan_s.mode(static_cast<std::size_t>(k));
                if (m == -na_s / 2) continue;  // drop the source Nyquist mode
                const int kk = m >= 0 ? m : m + na_d;
                wide[static_cast<std::size_t>(kk)] = row[static_cast<std::size_t>(k)] / static_cast<double>(na_s);
            }
            plan_d.inverse(wide.data());
            for (int k = 0; k < na_d; ++k)
                dense[static_cast<std::size_t>(j) * na_d + k] = wide[static_cast<std::size_t>(k)] * static_cast<double>(na_d);
        }
    }

    // Radial interpolation per target angular column with 6-node Lagrange
    // stencils; disc grids reach across the origin with the parity rule.
    GridFunction out(target);
    const auto& rs = src.radii();
    const int half_d = na_d / 2;
    for (int jd = 0; jd < dst.n_radial(); ++jd) {
        const double r = dst.radius(jd);
        // Choose the stencil window in the source radii.
        int lo = static_cast<int>(std::lower_bound(rs.begin(), rs.end(), r) - rs.begin());
        int base = std::clamp(lo - 3, src.is_disc() ? -2 : 0, nr_s - 6);
        double xs[6];
        for (int i = 0; i < 6; ++i) {
            const int jj = base + i;
            xs[i] = jj >= 0 ? rs[static_cast<std::size_t>(jj)] : -rs[static_cast<std::size_t>(-1 - jj)];
        }
        auto wts = fd_weights(r, std::span<const double>(xs, 6), 0);
        for (int k = 0; k < na_d; ++k) {
            Complex s{0.0, 0.0};
            for (int i = 0; i < 6; ++i) {
                const int jj = base + i;
                const int j_src = jj >= 0 ? jj : -1 - jj;
                const int k_src = jj >= 0 ? k : (k + half_d) % na_d;
                s += wts[static_cast<std::size_t>(i)] * dense[static_cast<std::size_t>(j_src) * na_d + k_src];
            }
            out.at(jd, k) = s;
        }
    }
    return out;
}

}  // namespace discfill
