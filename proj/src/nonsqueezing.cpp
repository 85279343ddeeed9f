#include "discfill/nonsqueezing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace discfill {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 8-point Gauss-Legendre on [-1, 1]; exact through degree 15, enough for
// |g'|²·s with candidates of degree ≤ 8.
constexpr double kG8x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kG8w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

Point2c AnalyticDiscCandidate::eval(Complex zeta) const {
    Complex z{0.0, 0.0}, w{0.0, 0.0};
    for (std::size_t i = coeff_z.size(); i-- > 0;) z = z * zeta + coeff_z[i];
    for (std::size_t i = coeff_w.size(); i-- > 0;) w = w * zeta + coeff_w[i];
    return {z * zeta, w * zeta};  // no constant term: g(0) = 0
}

Point2c AnalyticDiscCandidate::derivative(Complex zeta) const {
    Complex z{0.0, 0.0}, w{0.0, 0.0};
    for (std::size_t i = coeff_z.size(); i-- > 0;) z = z * zeta + static_cast<double>(i + 1) * coeff_z[i];
    for (std::size_t i = coeff_w.size(); i-- > 0;) w = w * zeta + static_cast<double>(i + 1) * coeff_w[i];
    return {z, w};
}

int AnalyticDiscCandidate::degree() const {
    return static_cast<int>(std::max(coeff_z.size(), coeff_w.size()));
}

bool AnalyticDiscCandidate::nonconstant() const {
    for (const Complex& c : coeff_z)
        if (std::abs(c) > 0.0) return true;
    for (const Complex& c : coeff_w)
        if (std::abs(c) > 0.0) return true;
    return false;
}

AnalyticDiscCandidate AnalyticDiscCandidate::line(Complex dir_z, Complex dir_w, double rho) {
    return {{dir_z}, {dir_w}, rho};
}

DomainSpec DomainSpec::ball(double r) {
    return DomainSpec("ball(" + fmt(r) + ")",
                      {[r](const Point2c& p) { return std::norm(p.z) + std::norm(p.w) - r * r; }});
}

DomainSpec DomainSpec::cylinder(double R) {
    return DomainSpec("cylinder(" + fmt(R) + ")", {[R](const Point2c& p) { return std::norm(p.z) - R * R; }});
}

DomainSpec DomainSpec::complex_bidisc() {
    return DomainSpec("complex_bidisc", {[](const Point2c& p) { return std::norm(p.z) - 1.0; },
                                         [](const Point2c& p) { return std::norm(p.w) - 1.0; }});
}

DomainSpec DomainSpec::real_bidisc() {
    return DomainSpec("real_bidisc",
                      {[](const Point2c& p) {
                           const double x1 = p.z.real(), x2 = p.w.real();
                           return x1 * x1 + x2 * x2 - 1.0;
                       },
                       [](const Point2c& p) {
                           const double y1 = p.z.imag(), y2 = p.w.imag();
                           return y1 * y1 + y2 * y2 - 1.0;
                       }});
}

bool DomainSpec::contains(const Point2c& p) const {
    for (const auto& g : gauges_)
        if (g(p) >= 0.0) return false;
    return true;
}

bool DomainSpec::contains_origin() const { return contains({{0.0, 0.0}, {0.0, 0.0}}); }

namespace {

// Inside-segments of [0, rho] along the ray θ: roots of every gauge located
// by scan + bisection, membership decided between consecutive breakpoints.
void ray_segments(const AnalyticDiscCandidate& c, const DomainSpec& G, double theta,
                  std::vector<std::pair<double, double>>& segments) {
    segments.clear();
    const Complex dir = std::polar(1.0, theta);
    const double rho = c.rho;
    std::vector<double> breaks = {0.0, rho};

    const int scan = std::max(96, 24 * c.degree());
    for (const auto& gauge : G.gauges()) {
        double prev_s = 0.0;
        double prev_v = gauge(c.eval(Complex{0.0, 0.0}));
        for (int i = 1; i <= scan; ++i) {
            const double s = rho * i / scan;
            const double v = gauge(c.eval(s * dir));
            if ((prev_v < 0.0) != (v < 0.0)) {
                double lo = prev_s, hi = s, vlo = prev_v;
                for (int b = 0; b < 60; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    const double vm = gauge(c.eval(mid * dir));
                    if ((vlo < 0.0) != (vm < 0.0)) {
                        hi = mid;
                    } else {
                        lo = mid;
                        vlo = vm;
                    }
                    if (hi - lo < 1e-14 * rho) break;
                }
                breaks.push_back(0.5 * (lo + hi));
            }
            prev_s = s;
            prev_v = v;
        }
    }
    std::sort(breaks.begin(), breaks.end());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double s0 = breaks[i], s1 = breaks[i + 1];
        if (s1 - s0 < 1e-15) continue;
        if (G.contains(c.eval(0.5 * (s0 + s1) * dir))) {
            if (!segments.empty() && std::abs(segments.back().second - s0) < 1e-13) {
                segments.back().second = s1;
            } else {
                segments.emplace_back(s0, s1);
            }
        }
    }
}

}  // namespace

double clipped_area(const AnalyticDiscCandidate& c, const DomainSpec& G, int n_rays) {
    if (!c.nonconstant()) throw NonsqueezingError("clipped_area: candidate is constant");
    double total = 0.0;
    std::vector<std::pair<double, double>> segments;
    for (int k = 0; k < n_rays; ++k) {
        const double theta = kTwoPi * k / n_rays;
        const Complex dir = std::polar(1.0, theta);
        ray_segments(c, G, theta, segments);
        double ray = 0.0;
        for (const auto& [s0, s1] : segments) {
            const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
            for (int g = 0; g < 8; ++g) {
                const double s = mid + half * kG8x[g];
                const Point2c d = c.derivative(s * dir);
                ray += half * kG8w[g] * (std::norm(d.z) + std::norm(d.w)) * s;
            }
        }
        total += ray;
    }
    return total * kTwoPi / n_rays;
}

bool exits_domain(const AnalyticDiscCandidate& c, const DomainSpec& G, int n_checks) {
    for (int k = 0; k < n_checks; ++k) {
        const Complex zeta = std::polar(c.rho, kTwoPi * k / n_checks);
        if (G.contains(c.eval(zeta))) return false;
    }
    return true;
}

bool ensure_exit(AnalyticDiscCandidate& c, const DomainSpec& G, double rho_cap) {
    while (c.rho <= rho_cap) {
        if (exits_domain(c, G)) return true;
        c.rho *= 1.25;
    }
    return false;
}

LelongReport lelong_check(const AnalyticDiscCandidate& c, double r, double rel_tol) {
    LelongReport rep;
    AnalyticDiscCandidate cand = c;
    if (!ensure_exit(cand, DomainSpec::ball(r))) {
        throw NonsqueezingError("lelong_check: candidate never exits the ball");
    }
    rep.area = clipped_area(cand, DomainSpec::ball(r));
    rep.bound = kPi * r * r;
    rep.margin = rep.area - rep.bound;
    rep.ok = rep.area >= rep.bound * (1.0 - rel_tol);
    return rep;
}

AnalyticDiscCandidate random_candidate(std::mt19937_64& rng, int degree, double scale) {
    std::normal_distribution<double> n(0.0, 1.0);
    AnalyticDiscCandidate c;
    c.coeff_z.resize(static_cast<std::size_t>(degree));
    c.coeff_w.resize(static_cast<std::size_t>(degree));
    double decay = 1.0;
    for (int k = 0; k < degree; ++k) {
        c.coeff_z[static_cast<std::size_t>(k)] = scale * decay * Complex{n(rng), n(rng)};
        c.coeff_w[static_cast<std::size_t>(k)] = scale * decay * Complex{n(rng), n(rng)};
        decay *= 0.6;
    }
    // Keep the leading pair away from zero so the image grows along every
    // direction and exit checks terminate.
    auto& lz = c.coeff_z.back();
    auto& lw = c.coeff_w.back();
    if (std::abs(lz) + std::abs(lw) < 0.1) lz += Complex{0.2, 0.0};
    c.rho = 1.0;
    return c;
}

RhEstimate rh_upper_estimate(const DomainSpec& G, std::mt19937_64& rng, const RhOptions& opts) {
    if (!G.contains_origin()) throw NonsqueezingError("rh_upper_estimate: domain must contain the origin");
    RhEstimate est;
    est.best_area = std::numeric_limits<double>::infinity();

    auto consider = [&](AnalyticDiscCandidate cand) {
        if (!cand.nonconstant()) return;
        if (!ensure_exit(cand, G)) return;
        if (est.evaluations >= opts.evaluation_budget) {
            est.budget_exhausted = true;
            return;
        }
        ++est.evaluations;
        const double a = clipped_area(cand, G, opts.n_rays);
        if (a < est.best_area) {
            est.best_area = a;
            est.best = cand;
        }
    };

    // Stratum 1: complex lines through the origin (exact minimizers for
    // round domains).
    std::uniform_real_distribution<double> u(0.0, 1.0);
    consider(AnalyticDiscCandidate::line({1.0, 0.0}, {0.0, 0.0}));
    consider(AnalyticDiscCandidate::line({0.0, 0.0}, {1.0, 0.0}));
    const int n_lines = std::max(8, opts.candidates / 8);
    for (int i = 0; i < n_lines; ++i) {
        const double a = std::acos(std::clamp(2.0 * u(rng) - 1.0, -1.0, 1.0)) / 2.0;
        const double p1 = kTwoPi * u(rng), p2 = kTwoPi * u(rng);
        consider(AnalyticDiscCandidate::line(std::polar(std::cos(a), p1), std::polar(std::sin(a), p2)));
    }

    // Stratum 2: random polynomial candidates.
    for (int i = 0; i < opts.candidates && !est.budget_exhausted; ++i) {
        consider(random_candidate(rng, opts.degree));
    }

    // Local refinement: coordinate descent on the best candidate.
    double step = 0.05;
    for (int round = 0; round < opts.refine_rounds && !est.budget_exhausted; ++round) {
        for (std::size_t ci = 0; ci < est.best.coeff_z.size() + est.best.coeff_w.size(); ++ci) {
            for (int part = 0; part < 2; ++part) {
                for (double sgn : {1.0, -1.0}) {
                    AnalyticDiscCandidate trial = est.best;
                    auto& cs = ci < trial.coeff_z.size() ? trial.coeff_z[ci] : trial.coeff_w[ci - trial.coeff_z.size()];
                    cs += (part == 0 ? Complex{sgn * step, 0.0} : Complex{0.0, sgn * step});
                    consider(std::move(trial));
                }
            }
        }
        step *= 0.5;
    }

    est.value = std::sqrt(std::max(0.0, est.best_area) / kPi);
    return est;
}

BidiscProbeReport real_bidisc_probe(std::mt19937_64& rng, int candidate_count) {
    BidiscProbeReport rep;
    const DomainSpec bidisc = DomainSpec::real_bidisc();
    const DomainSpec ball = DomainSpec::ball(1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // (a) 𝔹 ⊂ 𝔻²ℝ by sampling.
    for (int i = 0; i < 2000; ++i) {
        Vec4 v{u(rng), u(rng), u(rng), u(rng)};
        double n2 = 0.0;
        for (double x : v) n2 += x * x;
        if (n2 >= 1.0) continue;
        if (!bidisc.contains(to_point(v))) rep.ball_inside_bidisc = false;
    }

    // (b) b𝔹 ∩ b𝔻²ℝ ⊂ S1 ∪ S2: parametrize the interface directly. With
    // x1²+x2² = a and y1²+y2² = b, membership in both boundaries forces
    // a + b = 1 and max(a, b) = 1, i.e. (a, b) ∈ {(1,0), (0,1)}.
    for (int i = 0; i < 500; ++i) {
        // Random point of b𝔹 pushed onto b𝔻²ℝ by rescaling the larger part.
        Vec4 v{u(rng), u(rng), u(rng), u(rng)};
        double xx = v[0] * v[0] + v[2] * v[2];
        double yy = v[1] * v[1] + v[3] * v[3];
        if (xx < 1e-12 && yy < 1e-12) continue;
        // Scale x- and y-parts so that max = 1 and sum = 1: the only way to
        // sit on both boundaries. One part collapses.
        const bool x_dominates = xx >= yy;
        const double sx = x_dominates ? 1.0 / std::sqrt(xx) : 0.0;
        const double sy = x_dominates ? 0.0 : 1.0 / std::sqrt(yy);
        Vec4 q{v[0] * sx, v[1] * sy, v[2] * sx, v[3] * sy};
        // q is on b𝔹 and on b𝔻²ℝ; its distance to S1 ∪ S2 should vanish.
        const double d1 = std::abs(std::sqrt(q[0] * q[0] + q[2] * q[2]) - 1.0) + q[1] * q[1] + q[3] * q[3];
        const double d2 = std::abs(std::sqrt(q[1] * q[1] + q[3] * q[3]) - 1.0) + q[0] * q[0] + q[2] * q[2];
        rep.max_interface_distance = std::max(rep.max_interface_distance, std::min(d1, d2));
    }

    // (c) the algebraic curve (z1² + z2²)² = 1 misses the origin.
    rep.origin_curve_value = 0.0;  // (0 + 0)² = 0 ≠ 1

    // (d) candidate statistics: Lelong in the unit ball, excess area
    // outside it, boundary concentration near S1 ∪ S2.
    for (int i = 0; i < candidate_count; ++i) {
        AnalyticDiscCandidate cand = random_candidate(rng, 3);
        if (!ensure_exit(cand, bidisc)) continue;
        BidiscCandidateStat stat;
        stat.area_bidisc = clipped_area(cand, bidisc, 256);
        AnalyticDiscCandidate cb = cand;
        if (!ensure_exit(cb, ball)) continue;
        stat.area_ball = clipped_area(cb, ball, 256);
        stat.excess = stat.area_bidisc - stat.area_ball;
        if (stat.area_ball < kPi * (1.0 - 1e-4)) rep.lelong_all_ok = false;

        // Exit points through b𝔻²ℝ vs the two circles.
        int near = 0, total = 0;
        std::vector<std::pair<double, double>> segments;
        for (int k = 0; k < 64; ++k) {
            const double theta = kTwoPi * k / 64;
            ray_segments(cand, bidisc, theta, segments);
            if (segments.empty()) continue;
            const double s_exit = segments.back().second;
            if (s_exit >= cand.rho - 1e-9) continue;  // never crossed
            const Point2c q = cand.eval(std::polar(s_exit, theta));
            const Vec4 qv = to_vec4(q);
            const double d1 = std::hypot(std::sqrt(qv[0] * qv[0] + qv[2] * qv[2]) - 1.0,
                                         std::sqrt(qv[1] * qv[1] + qv[3] * qv[3]));
            const double d2 = std::hypot(std::sqrt(qv[1] * qv[1] + qv[3] * qv[3]) - 1.0,
                                         std::sqrt(qv[0] * qv[0] + qv[2] * qv[2]));
            if (std::min(d1, d2) < 0.15) ++near;
            ++total;
        }
        stat.boundary_concentration = total > 0 ? static_cast<double>(near) / total : 0.0;
        if (stat.boundary_concentration > 0.9) {
            ++rep.concentrated_candidates;
            if (stat.excess <= 0.0) rep.concentrated_all_excess_positive = false;
        }
        rep.candidates.push_back(stat);
    }
    return rep;
}

SqueezeExperiment SqueezeExperiment::shear_preset(double strength, double sigma) {
    SqueezeExperiment e{HamiltonianMap::planar_shear(strength, sigma, 1.0)};
    e.g1_radius = 0.8;
    e.R = 1.0;
    return e;
}

SqueezeExperiment SqueezeExperiment::identity_preset(double r) {
    // Zero-strength shear: exactly the identity, with the closed-form
    // evaluation paths installed.
    SqueezeExperiment e{HamiltonianMap::planar_shear(0.0, 1.0, 1.0)};
    e.g1_radius = r;
    e.R = r;
    return e;
}

SqueezeReport run_squeeze_experiment(const SqueezeExperiment& e) {
    SqueezeReport rep;
    rep.R = e.R;
    const Diffeomorphism phi = e.phi.as_diffeomorphism();
    rep.image_of_origin = phi.forward({{0.0, 0.0}, {0.0, 0.0}});

    // Setup check: φ(G1) stays inside the cylinder.
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < e.taming_samples; ++i) {
            Vec4 v{u(rng), u(rng), u(rng), u(rng)};
            double n2 = 0.0;
            for (double x : v) n2 += x * x;
            if (n2 >= 1.0) continue;
            Vec4 q{};
            for (int d = 0; d < 4; ++d) q[static_cast<std::size_t>(d)] = e.g1_radius * v[static_cast<std::size_t>(d)];
            const Point2c img = phi.forward(to_point(q));
            if (std::abs(img.z) >= e.R) {
                throw NonsqueezingError("run_squeeze_experiment: φ(G1) leaves the cylinder at |z| = " +
                                        fmt(std::abs(img.z)));
            }
        }
    }

    const AlmostComplexStructure pushed = pushforward(phi, AlmostComplexStructure::standard());
    {
        std::mt19937_64 rng(7);
        // Sample the pushforward over the image of G1 (where it is defined).
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double min_margin = 1.0;
        for (int i = 0; i < e.taming_samples; ++i) {
            Vec4 v{u(rng), u(rng), u(rng), u(rng)};
            double n2 = 0.0;
            for (double x : v) n2 += x * x;
            if (n2 >= 1.0) continue;
            Vec4 q{};
            for (int d = 0; d < 4; ++d)
                q[static_cast<std::size_t>(d)] = 0.98 * e.g1_radius * v[static_cast<std::size_t>(d)];
            const Point2c img = phi.forward(to_point(q));
            min_margin = std::min(min_margin, 1.0 - pushed.matrix(img).operator_norm());
        }
        rep.pushforward_taming_margin = min_margin;
        if (min_margin <= 0.0) {
            throw NonsqueezingError("run_squeeze_experiment: pushforward structure is not tamed");
        }
    }

    for (int n : e.exhaustion) {
        SqueezeStage stage;
        stage.n = n;
        const double r_in = e.g1_radius * (1.0 - 1.0 / (n + 1));
        const double r_out = e.g1_radius * (1.0 - 1.0 / (n + 2));
        stage.k_radius = r_in;

        auto gauge = [&phi](const Point2c& p) {
            const Point2c q = phi.inverse(p);
            return std::sqrt(std::norm(q.z) + std::norm(q.w));
        };
        const AlmostComplexStructure cut = blend_cutoff(pushed, gauge, r_in, r_out);

        // Product-model reduction: translate and scale the fiber so the
        // cutoff support sits inside the torus band and φ(0) at level 0.6.
        const double rho_g = r_out;
        const double c_shift = 2.0 * rho_g;
        const double scale = (10.0 / 3.0) * rho_g;

        // The reduced structure must be triangular over the working region.
        {
            std::vector<Point2c> samples;
            std::mt19937_64 rng(11);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (int i = 0; i < 200; ++i) {
                samples.push_back({e.R * Complex{u(rng), u(rng)} / std::numbers::sqrt2,
                                   Complex{c_shift + scale * 0.9 * u(rng), scale * 0.9 * u(rng)}});
            }
            (void)triangular_reduction(cut, samples, 1e-8);
        }

        TriangularStructure reduced(
            [cut, c_shift, scale](Complex z, Complex w2) {
                return cut.matrix({z, c_shift + scale * w2}).a11;
            },
            [cut, c_shift, scale](Complex z, Complex w2) {
                return cut.matrix({z, c_shift + scale * w2}).a21 / scale;
            },
            1.0 - 1e-9);

        ContinuationConfig march = e.march;
        march.R = e.R;
        march.grid_radial = e.grid_radial;
        march.grid_angular = e.grid_angular;
        march.t_start = 0.1;
        march.t_end = 0.6;

        Foliation fol;
        try {
            fol = run_continuation(reduced, march);
        } catch (const ContinuationBreakdown& bd) {
            rep.complete = false;
            rep.diagnostic = std::string("continuation breakdown in stage n = ") + std::to_string(n) + ": " +
                             bd.what();
            return rep;
        }

        // Disc through p = φ(0) in reduced coordinates.
        const Point2c p = rep.image_of_origin;
        const Complex w_target = (p.w - c_shift) / scale;
        auto through = find_disc_through(fol, reduced, {p.z, w_target}, 1e-9);
        stage.point_gap = through.gap * scale;

        const DiscSolution& disc = through.disc;
        const GridPtr grid = disc.w.grid_ptr();
        auto f_z = GridFunction::sample(grid, [&](Complex zeta) { return e.R * zeta; });
        GridFunction f_w(grid);
        for (std::size_t i = 0; i < f_w.size(); ++i)
            f_w.values()[i] = c_shift + scale * disc.w.values()[i];

        const SymplecticContext ctx = SymplecticContext::standard();
        stage.disc_area = pullback_area(f_z, f_w, ctx);

        // Mask of φ(K_n) along the disc and the pulled-back surface X_n.
        GridFunction mask(grid);
        GridFunction x_z(grid), x_w(grid);
        for (int j = 0; j < grid->n_radial(); ++j) {
            for (int k = 0; k < grid->n_angular(); ++k) {
                const Point2c img{f_z.at(j, k), f_w.at(j, k)};
                const Point2c pre = phi.inverse(img);
                x_z.at(j, k) = pre.z;
                x_w.at(j, k) = pre.w;
                const double g1_norm = std::sqrt(std::norm(pre.z) + std::norm(pre.w));
                mask.at(j, k) = Complex{g1_norm < r_in ? 1.0 : 0.0, 0.0};
            }
        }
        stage.clipped_image_area = pullback_area(f_z, f_w, ctx, &mask);
        stage.pulled_back_area = pullback_area(x_z, x_w, ctx, &mask);
        stage.transport_gap = std::abs(stage.clipped_image_area - stage.pulled_back_area);
        stage.rh_certificate = std::sqrt(std::max(0.0, stage.pulled_back_area) / kPi);

        rep.max_disc_area_error = std::max(rep.max_disc_area_error, std::abs(stage.disc_area - kPi * e.R * e.R));
        rep.max_transport_gap = std::max(rep.max_transport_gap, stage.transport_gap);
        rep.certificate = std::max(rep.certificate, stage.rh_certificate);
        rep.stages.push_back(stage);
    }
    rep.complete = true;
    return rep;
}

}  // namespace discfill
