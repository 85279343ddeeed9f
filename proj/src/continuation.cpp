#include "discfill/continuation.hpp"
#include <atomic>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

namespace discfill {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                int i;
                while ((i = next.fetch_add(1)) < n) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Max |∇w| over the grid, used to turn same-z fiber distances into honest
// lower bounds for distances between graphs.
double gradient_bound(const GridFunction& w) {
    DiffOptions raw;
    raw.check_resolution = false;
    GridFunction wz = d_z(w, raw);
    GridFunction wzb = d_zbar(w, raw);
    double m = 0.0;
    for (std::size_t i = 0; i < wz.size(); ++i)
        m = std::max(m, std::abs(wz.values()[i]) + std::abs(wzb.values()[i]));
    return m;
}

// Sampled minimum 4D distance between two graphs over the same grid:
// min_z |w_a(z) − w_b(z)| / sqrt(1 + L²), L a gradient bound of either.
double graph_distance(const DiscSolution& a, const DiscSolution& b, double grad_a, double grad_b) {
    double fiber = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.w.size(); ++i)
        fiber = std::min(fiber, std::abs(a.w.values()[i] - b.w.values()[i]));
    const double lip = std::max(grad_a, grad_b) / std::max(a.R, 1e-300);
    return fiber / std::sqrt(1.0 + lip * lip);
}

double boundary_distance(const DiscSolution& a, const DiscSolution& b) {
    const auto ta = a.w.boundary_trace();
    const auto tb = b.w.boundary_trace();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ta.size(); ++i) m = std::min(m, std::abs(ta[i] - tb[i]));
    return m;
}

}  // namespace

void ContinuationConfig::validate() const {
    if (!(t_start > 0.0 && t_start <= t_end && t_end <= 1.0))
        throw ContinuationError("ContinuationConfig: need 0 < t_start ≤ t_end ≤ 1");
    if (n_tau < 2) throw ContinuationError("ContinuationConfig: need at least 2 τ values");
    if (!(initial_step > 0.0 && step_floor > 0.0)) throw ContinuationError("ContinuationConfig: bad step sizes");
}

const DiscSolution& Foliation::disc(int level, int tau_index) const {
    return discs[static_cast<std::size_t>(level)][static_cast<std::size_t>(tau_index)];
}

bool Foliation::all_pass() const {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return !reports.empty();
}

int Foliation::nearest_level(double t) const {
    int best = 0;
    for (int i = 1; i < level_count(); ++i)
        if (std::abs(t_levels[static_cast<std::size_t>(i)] - t) <
            std::abs(t_levels[static_cast<std::size_t>(best)] - t))
            best = i;
    return best;
}

namespace {

LevelReport build_report(const ContinuationConfig& cfg, double t, std::vector<DiscSolution>& level,
                         const std::vector<DiscSolution>* previous) {
    LevelReport rep;
    rep.t = t;
    const int n_tau = static_cast<int>(level.size());
    const PolarGrid& grid = level[0].w.grid();

    std::vector<double> grads(static_cast<std::size_t>(n_tau));
    for (int i = 0; i < n_tau; ++i) {
        const DiscSolution& d = level[static_cast<std::size_t>(i)];
        rep.max_residual = std::max(rep.max_residual, d.residual_norm);
        rep.max_boundary_deviation = std::max(rep.max_boundary_deviation, d.boundary_deviation);
        rep.max_normalization_error = std::max(rep.max_normalization_error, d.normalization_error);
        rep.max_abs_winding = std::max(rep.max_abs_winding, std::abs(d.winding));
        rep.min_abs_w = (i == 0) ? d.min_abs_w : std::min(rep.min_abs_w, d.min_abs_w);
        grads[static_cast<std::size_t>(i)] = gradient_bound(d.w);
        rep.max_holder = std::max(rep.max_holder, holder_monitor(d.w, cfg.holder_alpha, cfg.delta_prime, 400000));
    }

    rep.separation_threshold = 2.0 * grid.radial_spacing() * std::max(1.0, cfg.R);
    rep.min_same_level_distance = std::numeric_limits<double>::infinity();
    rep.min_boundary_distance = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_tau; ++i) {
        for (int j = i + 1; j < n_tau; ++j) {
            rep.min_same_level_distance =
                std::min(rep.min_same_level_distance,
                         graph_distance(level[static_cast<std::size_t>(i)], level[static_cast<std::size_t>(j)],
                                        grads[static_cast<std::size_t>(i)], grads[static_cast<std::size_t>(j)]));
            rep.min_boundary_distance = std::min(
                rep.min_boundary_distance,
                boundary_distance(level[static_cast<std::size_t>(i)], level[static_cast<std::size_t>(j)]));
        }
    }

    rep.min_cross_level_distance = std::numeric_limits<double>::infinity();
    if (previous) {
        for (int i = 0; i < n_tau; ++i) {
            for (int j = 0; j < static_cast<int>(previous->size()); ++j) {
                rep.min_cross_level_distance = std::min(
                    rep.min_cross_level_distance,
                    graph_distance(level[static_cast<std::size_t>(i)], (*previous)[static_cast<std::size_t>(j)],
                                   grads[static_cast<std::size_t>(i)], 0.0));
            }
        }
    }

    // Boundary cover of the torus by the traces: sample (φ, ψ) against the
    // trace lattice; the threshold reflects the trace-lattice spacing.
    {
        const int na = grid.n_angular();
        const int n_phi = std::min(128, na);
        const int n_psi = 64;
        const int stride = na / n_phi;
        double worst = 0.0;
        for (int ip = 0; ip < n_phi; ++ip) {
            const int k = ip * stride;
            for (int iq = 0; iq < n_psi; ++iq) {
                const Complex target = std::polar(t, kTwoPi * iq / n_psi);
                double best = std::numeric_limits<double>::infinity();
                for (int i = 0; i < n_tau; ++i) {
                    const Complex trace = level[static_cast<std::size_t>(i)].w.at(grid.n_radial() - 1, k);
                    best = std::min(best, std::abs(trace - target));
                }
                worst = std::max(worst, best);
            }
        }
        rep.cover_gap = worst;
        rep.cover_threshold = 2.0 * std::max(kTwoPi / na * cfg.R, t * kTwoPi / n_tau);
    }

    rep.pass = rep.max_boundary_deviation < 1e-8 && rep.max_abs_winding == 0 && rep.min_abs_w > 0.0 &&
               rep.min_same_level_distance > rep.separation_threshold &&
               rep.min_boundary_distance > rep.separation_threshold &&
               (!previous || rep.min_cross_level_distance > 0.0) && rep.cover_gap < rep.cover_threshold;
    return rep;
}

}  // namespace

Foliation run_continuation(const TriangularStructure& T, const ContinuationConfig& cfg,
                           const SymplecticContext& ctx) {
    cfg.validate();
    auto grid = make_disc_grid(cfg.grid_radial, cfg.grid_angular);

    Foliation fol;
    fol.R = cfg.R;
    fol.attach = cfg.attach;
    fol.taus.resize(static_cast<std::size_t>(cfg.n_tau));
    for (int i = 0; i < cfg.n_tau; ++i) fol.taus[static_cast<std::size_t>(i)] = kTwoPi * i / cfg.n_tau;

    double last_good = -1.0;
    double step = cfg.initial_step;
    double t = cfg.t_start;
    int successes = 0;
    const std::vector<DiscSolution>* previous = nullptr;

    while (true) {
        std::vector<DiscSolution> level(static_cast<std::size_t>(cfg.n_tau),
                                        DiscSolution{GridFunction(grid), cfg.R, t, 0.0});
        bool failed = false;
        std::string failure;
        try {
            parallel_for(cfg.n_tau, cfg.threads, [&](int i) {
                const double tau = fol.taus[static_cast<std::size_t>(i)];
                const GridFunction* seed = previous ? &(*previous)[static_cast<std::size_t>(i)].w : nullptr;
                GridFunction scaled_seed(grid);
                if (seed) {
                    // Rescale the previous level's disc to the new |w| = t.
                    const double ratio = t / previous->at(static_cast<std::size_t>(i)).t;
                    scaled_seed = *seed;
                    for (auto& v : scaled_seed.values()) v *= ratio;
                }
                level[static_cast<std::size_t>(i)] =
                    attach_disc(T, {cfg.R, t}, tau, grid, cfg.attach, seed ? &scaled_seed : nullptr);
            });
        } catch (const AttachError& e) {
            failed = true;
            failure = e.what();
        } catch (const BeltramiError& e) {
            failed = true;
            failure = e.what();
        }

        if (failed) {
            step *= cfg.step_shrink;
            if (step < cfg.step_floor) {
                throw ContinuationBreakdown("continuation: step underflow at t = " + fmt(t) +
                                                " (last good t = " + fmt(last_good) + "): " + failure,
                                            last_good);
            }
            if (last_good < 0.0) {
                // The flat seed at t_start is the entry point of the family;
                // shrinking the step cannot help there.
                throw ContinuationBreakdown(
                    "continuation: first level t = " + fmt(cfg.t_start) + " failed: " + failure, last_good);
            }
            t = last_good + step;
            successes = 0;
            continue;
        }

        for (auto& d : level) d.area = area(d, ctx);
        fol.reports.push_back(build_report(cfg, t, level, previous));
        fol.holder_bound_seen = std::max(fol.holder_bound_seen, fol.reports.back().max_holder);
        fol.t_levels.push_back(t);
        fol.discs.push_back(std::move(level));
        previous = &fol.discs.back();
        last_good = t;

        if (t >= cfg.t_end - 1e-12) break;
        ++successes;
        if (successes >= cfg.grow_after) {
            step *= cfg.step_grow;
            successes = 0;
        }
        t = std::min(t + step, cfg.t_end);
    }
    return fol;
}

Complex evaluate_at(const GridFunction& f, Complex z) {
    const PolarGrid& g = f.grid();
    const double r = std::abs(z);
    const double theta = std::arg(z);
    const auto& rs = g.radii();
    if (r > g.outer_radius() + 1e-12 || (!g.is_disc() && r < rs.front() - 1e-12))
        throw GridError("evaluate_at: point outside the grid domain");

    int lo = static_cast<int>(std::lower_bound(rs.begin(), rs.end(), r) - rs.begin());
    const int nr = g.n_radial();
    int base = std::clamp(lo - 3, g.is_disc() ? -2 : 0, nr - 6);

    const FftPlan& plan = g.fft();
    const int na = g.n_angular();
    std::vector<Complex> row(static_cast<std::size_t>(na));
    double xs[6];
    Complex vals[6];
    for (int i = 0; i < 6; ++i) {
        const int jj = base + i;
        const int j_src = jj >= 0 ? jj : -1 - jj;
        const double th = jj >= 0 ? theta : theta + std::numbers::pi;
        xs[i] = jj >= 0 ? rs[static_cast<std::size_t>(j_src)] : -rs[static_cast<std::size_t>(j_src)];
        for (int k = 0; k < na; ++k) row[static_cast<std::size_t>(k)] = f.at(j_src, k);
        plan.forward(row.data());
        Complex s{0.0, 0.0};
        for (int k = 0; k < na; ++k) {
            const int m = plan.mode(static_cast<std::size_t>(k));
            if (m == -na / 2) continue;
            s += row[static_cast<std::size_t>(k)] * std::polar(1.0, m * th);
        }
        vals[i] = s / static_cast<double>(na);
    }
    auto wts = fd_weights(r, std::span<const double>(xs, 6), 0);
    Complex out{0.0, 0.0};
    for (int i = 0; i < 6; ++i) out += wts[static_cast<std::size_t>(i)] * vals[i];
    return out;
}

DiscThroughPoint find_disc_through(const Foliation& F, const TriangularStructure& T, const Point2c& p,
                                   double gap_tolerance, int max_solves) {
    if (F.level_count() == 0) throw ContinuationError("find_disc_through: empty foliation");
    const Complex zp = p.z / F.R;
    if (std::abs(zp) > 1.0 + 1e-12) throw ContinuationError("find_disc_through: point outside the cylinder");

    // Seed from the nearest stored disc.
    int best_level = 0, best_tau = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int l = 0; l < F.level_count(); ++l) {
        for (int i = 0; i < F.tau_count(); ++i) {
            const double score = std::abs(evaluate_at(F.disc(l, i).w, zp) - p.w);
            if (score < best_score) {
                best_score = score;
                best_level = l;
                best_tau = i;
            }
        }
    }

    const DiscSolution& seed_disc = F.disc(best_level, best_tau);
    double t = seed_disc.t;
    double tau = seed_disc.tau;
    GridFunction seed = seed_disc.w;
    const GridPtr grid = seed.grid_ptr();
    const AttachOptions& opts = F.attach;

    DiscThroughPoint out{seed_disc, best_score, 0};
    for (int it = 0; it < max_solves; ++it) {
        DiscSolution sol = attach_disc(T, {F.R, t}, tau, grid, opts, &seed);
        ++out.solves;
        const Complex got = evaluate_at(sol.w, zp);
        const double gap = std::abs(got - p.w);
        if (gap < out.gap) {
            out.disc = sol;
            out.gap = gap;
        }
        if (gap < gap_tolerance) break;
        // Newton-like update in (log t, τ) from the product model
        // w(z_p) ≈ t e^{iτ} g(z_p).
        const Complex ratio = p.w / got;
        double new_t = t * std::exp(std::clamp(std::log(std::abs(ratio)), -0.5, 0.5));
        new_t = std::clamp(new_t, 1e-4, 1.0);
        tau += std::arg(ratio);
        seed = sol.w;
        for (auto& v : seed.values()) v *= new_t / t * std::polar(1.0, std::arg(ratio));
        t = new_t;
    }
    return out;
}

CoverReport check_foliation_cover(const Foliation& F, const TriangularStructure& T,
                                  std::span<const Point2c> samples, double gap_tolerance) {
    CoverReport rep;
    rep.threshold = gap_tolerance;
    const double t_lo = F.t_levels.front();
    const double t_hi = F.t_levels.back();
    for (const Point2c& p : samples) {
        CoverSample cs;
        cs.point = p;
        const double level_guess = std::abs(p.w);
        if (level_guess < t_lo - 1e-9 || level_guess > t_hi + 1e-9 || std::abs(p.z) > F.R) {
            cs.in_range = false;
            ++rep.outside_range;
        } else {
            cs.in_range = true;
            auto found = find_disc_through(F, T, p, gap_tolerance);
            cs.gap = found.gap;
            cs.t = found.disc.t;
            cs.tau = found.disc.tau;
            rep.max_gap = std::max(rep.max_gap, found.gap);
        }
        rep.samples.push_back(cs);
    }
    rep.pass = rep.max_gap < rep.threshold;
    return rep;
}

LeviFlatReport leviflat_probe(const Foliation& F, const TriangularStructure& T, int level, int sample_count,
                              std::mt19937_64& rng) {
    LeviFlatReport rep;
    if (level < 0 || level >= F.level_count()) throw ContinuationError("leviflat_probe: bad level");
    const auto& discs = F.discs[static_cast<std::size_t>(level)];
    const PolarGrid& grid = discs[0].w.grid();
    // Match tolerance below the family's fiber separation.
    const double sep = F.reports[static_cast<std::size_t>(level)].min_same_level_distance;
    rep.match_tolerance = 0.5 * std::max(sep, 1e-9);

    std::uniform_int_distribution<int> tau_pick(0, static_cast<int>(discs.size()) - 1);
    std::uniform_int_distribution<int> jpick(0, grid.n_radial() - 1);
    std::uniform_int_distribution<int> kpick(0, grid.n_angular() - 1);

    for (int s = 0; s < sample_count; ++s) {
        const int owner = tau_pick(rng);
        const int j = jpick(rng), k = kpick(rng);
        const Complex wv = discs[static_cast<std::size_t>(owner)].w.at(j, k);
        int hits = 0;
        for (const auto& d : discs) {
            if (std::abs(d.w.at(j, k) - wv) < rep.match_tolerance) ++hits;
        }
        if (hits != 1) ++rep.anomalies;

        // Residual of the owning disc re-checked at the sampled point.
        const Complex z = F.R * grid.node(j, k);
        GridFunction res_field(discs[static_cast<std::size_t>(owner)].w.grid_ptr());
        // Local residual via the global field once per disc would be
        // cheaper, but sample counts are small.
        DiffOptions raw;
        raw.check_resolution = false;
        const auto& w = discs[static_cast<std::size_t>(owner)].w;
        GridFunction wzb = d_zbar(w, raw), wz = d_z(w, raw);
        const Complex defect = wzb.at(j, k) + T.a(z, wv) * wz.at(j, k) - F.R * T.b(z, wv);
        rep.max_point_residual = std::max(rep.max_point_residual, std::abs(defect));
        ++rep.samples;
    }
    rep.pass = rep.anomalies == 0;
    return rep;
}

RestartReport restart_stability_probe(const Foliation& F, const TriangularStructure& T, int max_probes,
                                      std::mt19937_64& rng, double perturbation) {
    RestartReport rep;
    if (F.level_count() == 0) return rep;
    std::uniform_int_distribution<int> lpick(0, F.level_count() - 1);
    std::uniform_int_distribution<int> tpick(0, F.tau_count() - 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    const AttachOptions& opts = F.attach;
    for (int i = 0; i < max_probes; ++i) {
        const DiscSolution& ref = F.disc(lpick(rng), tpick(rng));
        // Smooth multiplicative perturbation of the seed (winding-safe).
        const Complex c1{perturbation * u(rng), perturbation * u(rng)};
        const Complex c2{perturbation * u(rng), perturbation * u(rng)};
        GridFunction seed = ref.w;
        const PolarGrid& g = seed.grid();
        for (int j = 0; j < g.n_radial(); ++j) {
            for (int k = 0; k < g.n_angular(); ++k) {
                const Complex z = g.node(j, k);
                seed.at(j, k) *= std::exp(c1 * z + c2 * std::norm(z));
            }
        }
        DiscSolution redo = attach_disc(T, {ref.R, ref.t}, ref.tau, seed.grid_ptr(), opts, &seed);
        double dev = 0.0;
        for (std::size_t n = 0; n < redo.w.size(); ++n)
            dev = std::max(dev, std::abs(redo.w.values()[n] - ref.w.values()[n]));
        rep.max_deviation = std::max(rep.max_deviation, dev);
        ++rep.probes;
    }
    return rep;
}

}  // namespace discfill
