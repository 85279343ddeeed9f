#include "discfill/symplectic.hpp"

#include <cmath>
#include <numbers>
#include <memory>

namespace discfill {

namespace {

Vec4 axis(int i) {
    Vec4 v{};
    v[static_cast<std::size_t>(i)] = 1.0;
    return v;
}

Vec4 add_scaled(const Vec4& p, const Vec4& d, double s) {
    Vec4 q = p;
    for (int i = 0; i < 4; ++i) q[static_cast<std::size_t>(i)] += s * d[static_cast<std::size_t>(i)];
    return q;
}

}  // namespace

SymplecticContext SymplecticContext::standard() {
    SymplecticContext ctx;
    ctx.omega = [](const Point2c&, const Vec4& v, const Vec4& w) { return omega_st(v, w); };
    ctx.lambda = [](const Point2c& p, const Vec4& v) {
        const Vec4 q = to_vec4(p);
        return 0.5 * (q[0] * v[1] - q[1] * v[0] + q[2] * v[3] - q[3] * v[2]);
    };
    ctx.structure = AlmostComplexStructure::standard();
    return ctx;
}

SymplecticContext SymplecticContext::with_structure(AlmostComplexStructure J) const {
    SymplecticContext ctx = *this;
    ctx.structure = std::move(J);
    return ctx;
}

double exactness_defect(const SymplecticContext& ctx, std::span<const Point2c> samples, double step) {
    double worst = 0.0;
    for (const Point2c& p : samples) {
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                const Vec4 ei = axis(i), ej = axis(j);
                const Vec4 p4 = to_vec4(p);
                // dλ(e_i, e_j) = ∂_i λ(e_j) − ∂_j λ(e_i).
                const double di = (ctx.lambda(to_point(add_scaled(p4, ei, step)), ej) -
                                   ctx.lambda(to_point(add_scaled(p4, ei, -step)), ej)) /
                                  (2.0 * step);
                const double dj = (ctx.lambda(to_point(add_scaled(p4, ej, step)), ei) -
                                   ctx.lambda(to_point(add_scaled(p4, ej, -step)), ei)) /
                                  (2.0 * step);
                worst = std::max(worst, std::abs(di - dj - ctx.omega(p, ei, ej)));
            }
        }
    }
    return worst;
}

double pullback_area(const GridFunction& f1, const GridFunction& f2, const SymplecticContext& ctx,
                     const GridFunction* mask) {
    const PolarGrid& g = f1.grid();
    DiffOptions raw;
    raw.check_resolution = false;
    GridFunction f1z = d_z(f1, raw), f1zb = d_zbar(f1, raw);
    GridFunction f2z = d_z(f2, raw), f2zb = d_zbar(f2, raw);
    double total = 0.0;
    for (int j = 0; j < g.n_radial(); ++j) {
        double row = 0.0;
        for (int k = 0; k < g.n_angular(); ++k) {
            // ∂_x = ∂_z + ∂_z̄, ∂_y = i(∂_z − ∂_z̄).
            const Complex f1x = f1z.at(j, k) + f1zb.at(j, k);
            const Complex f1y = Complex{0.0, 1.0} * (f1z.at(j, k) - f1zb.at(j, k));
            const Complex f2x = f2z.at(j, k) + f2zb.at(j, k);
            const Complex f2y = Complex{0.0, 1.0} * (f2z.at(j, k) - f2zb.at(j, k));
            const Vec4 u{f1x.real(), f1x.imag(), f2x.real(), f2x.imag()};
            const Vec4 v{f1y.real(), f1y.imag(), f2y.real(), f2y.imag()};
            const Point2c p{f1.at(j, k), f2.at(j, k)};
            double w = ctx.omega(p, u, v);
            if (mask) w *= mask->at(j, k).real();
            row += w;
        }
        total += g.quadrature_weight(j) * row;
    }
    return total;
}

double area(const DiscSolution& s, const SymplecticContext& ctx) {
    s.w.require_finite("area");
    auto ident = GridFunction::sample(s.w.grid_ptr(), [&](Complex z) { return s.R * z; });
    return pullback_area(ident, s.w, ctx);
}

double boundary_area_of_curve(std::span<const Complex> z_curve, std::span<const Complex> w_curve,
                              const SymplecticContext& ctx) {
    const std::size_t n = z_curve.size();
    if (w_curve.size() != n) throw SymplecticError("boundary_area_of_curve: length mismatch");
    const auto dz = curve_derivative(z_curve);
    const auto dw = curve_derivative(w_curve);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Point2c p{z_curve[k], w_curve[k]};
        const Vec4 tangent{dz[k].real(), dz[k].imag(), dw[k].real(), dw[k].imag()};
        total += ctx.lambda(p, tangent);
    }
    return total * 2.0 * std::numbers::pi / static_cast<double>(n);
}

double boundary_area(const DiscSolution& s, const SymplecticContext& ctx) {
    const PolarGrid& g = s.w.grid();
    const int na = g.n_angular();
    std::vector<Complex> zc(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) zc[static_cast<std::size_t>(k)] = s.R * std::polar(1.0, g.theta(k));
    return boundary_area_of_curve(zc, s.w.boundary_trace(), ctx);
}

double boundary_length(const DiscSolution& s, const SymplecticContext& ctx) {
    const PolarGrid& g = s.w.grid();
    const int na = g.n_angular();
    std::vector<Complex> zc(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) zc[static_cast<std::size_t>(k)] = s.R * std::polar(1.0, g.theta(k));
    const auto dz = curve_derivative(zc);
    const auto dw = curve_derivative(s.w.boundary_trace());
    const auto wb = s.w.boundary_trace();
    double total = 0.0;
    for (int k = 0; k < na; ++k) {
        const Point2c p{zc[static_cast<std::size_t>(k)], wb[static_cast<std::size_t>(k)]};
        const Vec4 tangent{dz[static_cast<std::size_t>(k)].real(), dz[static_cast<std::size_t>(k)].imag(),
                           dw[static_cast<std::size_t>(k)].real(), dw[static_cast<std::size_t>(k)].imag()};
        total += metric_norm(tangent, p, ctx);
    }
    return total * 2.0 * std::numbers::pi / static_cast<double>(na);
}

double metric_norm(const Vec4& v, const Point2c& p, const SymplecticContext& ctx) {
    const Mat4 j = ctx.structure.structure_at(p);
    const double mu = ctx.omega(p, v, j.apply(v));
    double vsq = 0.0;
    for (double x : v) vsq += x * x;
    if (mu <= 0.0 && vsq > 1e-28) {
        throw TamingError("metric_norm: ω(V, JV) ≤ 0, structure not tamed at the evaluation point");
    }
    return std::sqrt(std::max(0.0, mu));
}

HamiltonianMap::HamiltonianMap(Scalar hamiltonian, double flow_time, const HamiltonianOptions& opts,
                               Gradient gradient)
    : h_(std::move(hamiltonian)), grad_(std::move(gradient)), time_(flow_time), opts_(opts) {
    if (!(opts_.dt > 0.0)) throw SymplecticError("HamiltonianMap: dt must be positive");
    for (const Point2c& p : opts_.drift_probes) {
        const double drift = invariant_drift(p);
        if (drift > opts_.drift_threshold) {
            throw AccuracyError("HamiltonianMap: invariant drift " + std::to_string(drift) +
                                " exceeds threshold; reduce dt");
        }
    }
}

Vec4 hamiltonian_field(const std::function<double(const Point2c&)>& h,
                       const std::function<Vec4(const Point2c&)>& grad, const Point2c& p) {
    Vec4 g{};
    if (grad) {
        g = grad(p);
    } else {
        const double step = 1e-6;
        const Vec4 p4 = to_vec4(p);
        for (int i = 0; i < 4; ++i) {
            g[static_cast<std::size_t>(i)] =
                (h(to_point(add_scaled(p4, axis(i), step))) - h(to_point(add_scaled(p4, axis(i), -step)))) /
                (2.0 * step);
        }
    }
    // X_H = (H_{y1}, −H_{x1}, H_{y2}, −H_{x2}).
    return {g[1], -g[0], g[3], -g[2]};
}

Point2c HamiltonianMap::integrate(Point2c p, double total_time) const {
    const double sign = total_time >= 0.0 ? 1.0 : -1.0;
    double remaining = std::abs(total_time);
    Vec4 z = to_vec4(p);
    while (remaining > 1e-15) {
        const double h = sign * std::min(opts_.dt, remaining);
        // Implicit midpoint: y = z + h·X_H((z+y)/2).
        Vec4 y = z;
        {
            const Vec4 f0 = hamiltonian_field(h_, grad_, to_point(z));
            y = add_scaled(z, f0, h);
        }
        for (int it = 0; it < 50; ++it) {
            Vec4 mid{};
            for (int i = 0; i < 4; ++i)
                mid[static_cast<std::size_t>(i)] = 0.5 * (z[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i)]);
            const Vec4 f = hamiltonian_field(h_, grad_, to_point(mid));
            Vec4 y_new = add_scaled(z, f, h);
            double diff = 0.0;
            for (int i = 0; i < 4; ++i)
                diff = std::max(diff, std::abs(y_new[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]));
            y = y_new;
            if (diff < 1e-15) break;
        }
        z = y;
        remaining -= std::abs(h);
    }
    return to_point(z);
}

Point2c HamiltonianMap::forward(const Point2c& p) const {
    if (exact_forward_) return exact_forward_(p);
    return integrate(p, time_);
}

Point2c HamiltonianMap::inverse(const Point2c& p) const {
    if (exact_inverse_) return exact_inverse_(p);
    return integrate(p, -time_);
}

Mat4 HamiltonianMap::differential(const Point2c& p) const {
    if (exact_differential_) return exact_differential_(p);
    const double step = 1e-5;
    Mat4 d;
    const Vec4 p4 = to_vec4(p);
    for (int c = 0; c < 4; ++c) {
        const Point2c plus = forward(to_point(add_scaled(p4, axis(c), step)));
        const Point2c minus = forward(to_point(add_scaled(p4, axis(c), -step)));
        const Vec4 vp = to_vec4(plus), vm = to_vec4(minus);
        for (int r = 0; r < 4; ++r)
            d.m[r][c] = (vp[static_cast<std::size_t>(r)] - vm[static_cast<std::size_t>(r)]) / (2.0 * step);
    }
    return d;
}

Diffeomorphism HamiltonianMap::as_diffeomorphism() const {
    // The closures own a copy: they may outlive the map they were made from.
    auto self = std::make_shared<HamiltonianMap>(*this);
    Diffeomorphism d;
    d.forward = [self](const Point2c& p) { return self->forward(p); };
    d.inverse = [self](const Point2c& p) { return self->inverse(p); };
    d.differential = [self](const Point2c& p) { return self->differential(p); };
    return d;
}

double HamiltonianMap::pullback_defect(const Point2c& p) const {
    const Mat4 d = differential(p);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const Vec4 di = d.apply(axis(i));
            const Vec4 dj = d.apply(axis(j));
            worst = std::max(worst, std::abs(omega_st(di, dj) - omega_st(axis(i), axis(j))));
        }
    }
    return worst;
}

double HamiltonianMap::invariant_drift(const Point2c& p) const {
    return std::abs(h_(forward(p)) - h_(p));
}

HamiltonianMap HamiltonianMap::planar_shear(double strength, double sigma, double flow_time) {
    const double spi = std::sqrt(std::numbers::pi);
    Scalar h = [strength, sigma, spi](const Point2c& p) {
        return strength * sigma * spi / 2.0 * std::erf(p.z.imag() / sigma);
    };
    Gradient grad = [strength, sigma](const Point2c& p) {
        const double y = p.z.imag();
        return Vec4{0.0, strength * std::exp(-(y / sigma) * (y / sigma)), 0.0, 0.0};
    };
    HamiltonianOptions opts;
    opts.drift_threshold = 1e-6;
    HamiltonianMap map(std::move(h), flow_time, opts, std::move(grad));
    const double s = strength, sg = sigma, T = flow_time;
    map.exact_forward_ = [s, sg, T](const Point2c& p) {
        const double y = p.z.imag();
        return Point2c{p.z + T * s * std::exp(-(y / sg) * (y / sg)), p.w};
    };
    map.exact_inverse_ = [s, sg, T](const Point2c& p) {
        const double y = p.z.imag();
        return Point2c{p.z - T * s * std::exp(-(y / sg) * (y / sg)), p.w};
    };
    map.exact_differential_ = [s, sg, T](const Point2c& p) {
        const double y = p.z.imag();
        Mat4 d = Mat4::identity();
        d.m[0][1] = -2.0 * T * s * y / (sg * sg) * std::exp(-(y / sg) * (y / sg));
        return d;
    };
    return map;
}

}  // namespace discfill
