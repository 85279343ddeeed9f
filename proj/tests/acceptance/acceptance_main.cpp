// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria and tolerances are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "discfill/continuation.hpp"
#include "discfill/nonsqueezing.hpp"
#include "discfill/presets.hpp"
#include "discfill/runner.hpp"

using namespace discfill;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
    int id;
    std::string title;
    bool pass = false;
    std::string detail;
};

double wall_seconds(const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: flat foliation exactness at 64x256 with 16 τ, under a minute.
// ---------------------------------------------------------------------------
Criterion criterion_flat_foliation() {
    Criterion c;
    c.id = 1;
    c.title = "flat foliation exactness (sup error < 1e-8, areas = pi ± 1e-8, < 60 s)";
    ContinuationConfig cfg;
    cfg.grid_radial = 64;
    cfg.grid_angular = 256;
    cfg.n_tau = 16;
    cfg.threads = 4;

    Foliation fol;
    const double secs = wall_seconds([&] { fol = run_continuation(presets::flat(), cfg); });

    double sup_err = 0.0;
    double area_err = 0.0;
    for (int l = 0; l < fol.level_count(); ++l) {
        const double t = fol.t_levels[static_cast<std::size_t>(l)];
        for (int i = 0; i < fol.tau_count(); ++i) {
            const DiscSolution& d = fol.disc(l, i);
            const Complex expect = std::polar(t, fol.taus[static_cast<std::size_t>(i)]);
            for (const Complex& v : d.w.values()) sup_err = std::max(sup_err, std::abs(v - expect));
            area_err = std::max(area_err, std::abs(d.area - kPi));
        }
    }
    c.pass = sup_err < 1e-8 && area_err < 1e-8 && secs < 60.0 && fol.all_pass();
    c.detail = "sup_err=" + fmt(sup_err) + " area_err=" + fmt(area_err) + " levels=" +
               std::to_string(fol.level_count()) + " runtime=" + fmt(secs) + "s";
    return c;
}

// ---------------------------------------------------------------------------
// Criteria 2 and 8 share the perturbed 64x256 run.
// ---------------------------------------------------------------------------
struct PerturbedRun {
    Foliation fol;
    TriangularStructure tri = presets::bump(0.3);
    bool completed = false;
    std::string failure;
};

PerturbedRun run_perturbed() {
    PerturbedRun run;
    ContinuationConfig cfg;
    cfg.grid_radial = 64;
    cfg.grid_angular = 256;
    cfg.n_tau = 16;
    cfg.threads = 4;
    cfg.attach.residual_cap = 1e-2;
    try {
        run.fol = run_continuation(run.tri, cfg);
        run.completed = true;
    } catch (const std::exception& e) {
        run.failure = e.what();
    }
    return run;
}

Criterion criterion_perturbed_areas(const PerturbedRun& run) {
    Criterion c;
    c.id = 2;
    c.title = "perturbed-structure run: interior & Stokes areas = pi ± 1e-3";
    if (!run.completed) {
        c.detail = "continuation failed: " + run.failure;
        return c;
    }
    const SymplecticContext ctx = SymplecticContext::standard();
    double worst_interior = 0.0, worst_boundary = 0.0, worst_gap = 0.0;
    for (int l = 0; l < run.fol.level_count(); ++l) {
        for (int i = 0; i < run.fol.tau_count(); ++i) {
            const DiscSolution& d = run.fol.disc(l, i);
            const double e_bd = boundary_area(d, ctx);
            worst_interior = std::max(worst_interior, std::abs(d.area - kPi));
            worst_boundary = std::max(worst_boundary, std::abs(e_bd - kPi));
            worst_gap = std::max(worst_gap, std::abs(d.area - e_bd));
        }
    }
    c.pass = worst_interior < 1e-3 && worst_boundary < 1e-3 && worst_gap < 1e-3;
    c.detail = "max|E-pi|=" + fmt(worst_interior) + " max|E_bd-pi|=" + fmt(worst_boundary) +
               " max_stokes_gap=" + fmt(worst_gap) + " levels=" + std::to_string(run.fol.level_count());
    return c;
}

Criterion criterion_admissibility(const PerturbedRun& run) {
    Criterion c;
    c.id = 8;
    c.title = "admissibility suite on the perturbed run (Definition-style checks + restart stability)";
    if (!run.completed) {
        c.detail = "continuation failed: " + run.failure;
        return c;
    }
    const Foliation& fol = run.fol;
    double worst_boundary = 0.0, min_sep = std::numeric_limits<double>::infinity();
    double worst_cover = 0.0;
    int worst_winding = 0;
    bool sep_ok = true, cover_ok = true;
    for (const auto& rep : fol.reports) {
        worst_boundary = std::max(worst_boundary, rep.max_boundary_deviation);
        worst_winding = std::max(worst_winding, rep.max_abs_winding);
        min_sep = std::min(min_sep, rep.min_same_level_distance / rep.separation_threshold);
        sep_ok = sep_ok && rep.min_same_level_distance > rep.separation_threshold &&
                 rep.min_boundary_distance > rep.separation_threshold;
        cover_ok = cover_ok && rep.cover_gap < rep.cover_threshold;
        worst_cover = std::max(worst_cover, rep.cover_gap / rep.cover_threshold);
    }
    std::mt19937_64 rng(1234);
    auto restart = restart_stability_probe(fol, run.tri, 8, rng);

    c.pass = worst_boundary < 1e-8 && worst_winding == 0 && sep_ok && cover_ok &&
             restart.max_deviation < 1e-6 && fol.all_pass();
    c.detail = "max_boundary_dev=" + fmt(worst_boundary) + " windings=" + std::to_string(worst_winding) +
               " min_sep/threshold=" + fmt(min_sep) + " max_cover/threshold=" + fmt(worst_cover) +
               " restart_dev=" + fmt(restart.max_deviation);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 3: manufactured Beltrami solutions.
// ---------------------------------------------------------------------------
Criterion criterion_manufactured() {
    Criterion c;
    c.id = 3;
    c.title = "Beltrami manufactured solutions (residual < 1e-8, recovery < 1e-6, 4x refinement)";
    struct Case {
        std::function<Complex(Complex)> w;
        std::function<Complex(Complex)> q;
        std::function<Complex(Complex)> Q;
    };
    auto w_a = [](Complex z) { return std::conj(z) * std::conj(z) + std::exp(z); };
    auto w_b = [](Complex z) { return std::sin(z) + z * std::conj(z); };
    std::vector<Case> cases = {
        {w_a, [](Complex) { return Complex{0.0, 0.0}; }, [](Complex z) { return 2.0 * std::conj(z); }},
        {w_a, [](Complex) { return Complex{0.3, 0.0}; },
         [](Complex z) { return 2.0 * std::conj(z) - 0.3 * std::exp(z); }},
        {w_a, [](Complex z) { return 0.3 * z; },
         [](Complex z) { return 2.0 * std::conj(z) - 0.3 * z * std::exp(z); }},
        {w_b, [](Complex) { return Complex{0.6, 0.0}; },
         [](Complex z) { return z - 0.6 * (std::cos(z) + std::conj(z)); }},
        {w_a, [](Complex z) { return 0.6 * std::conj(z) * std::conj(z); },
         [](Complex z) { return 2.0 * std::conj(z) - 0.6 * std::conj(z) * std::conj(z) * std::exp(z); }},
    };

    auto grid = make_disc_grid(64, 256);
    double worst_res = 0.0, worst_rec = 0.0;
    for (const Case& mc : cases) {
        auto q = GridFunction::sample(grid, mc.q);
        auto Q = GridFunction::sample(grid, mc.Q);
        std::vector<Complex> trace(static_cast<std::size_t>(grid->n_angular()));
        for (int k = 0; k < grid->n_angular(); ++k)
            trace[static_cast<std::size_t>(k)] = mc.w(grid->node(grid->n_radial() - 1, k));
        SolveOptions opts;
        opts.tolerance = 1e-8;
        auto sol = solve_beltrami(BeltramiProblem(std::move(q), std::move(Q)), BoundaryCondition::dirichlet(trace),
                                  opts);
        worst_res = std::max(worst_res, sol.residual_norm);
        double rec = 0.0;
        for (int j = 0; j < grid->n_radial(); ++j)
            for (int k = 0; k < grid->n_angular(); ++k)
                rec = std::max(rec, std::abs(sol.w.at(j, k) - mc.w(grid->node(j, k))));
        worst_rec = std::max(worst_rec, rec);
    }

    // Refinement factor on a radially rich case, both solves run to their
    // discrete fixed points.
    auto rich_w = [](Complex z) { return std::pow(std::conj(z), 9) / 9.0 + std::exp(z); };
    auto rich_Q = [](Complex z) { return std::pow(std::conj(z), 8) - 0.3 * std::exp(z); };
    auto run_rich = [&](const GridPtr& g) {
        auto q = GridFunction::constant(g, {0.3, 0.0});
        auto Q = GridFunction::sample(g, rich_Q);
        std::vector<Complex> trace(static_cast<std::size_t>(g->n_angular()));
        for (int k = 0; k < g->n_angular(); ++k)
            trace[static_cast<std::size_t>(k)] = rich_w(g->node(g->n_radial() - 1, k));
        SolveOptions opts;
        opts.tolerance = 1e-14;
        opts.stop_at_floor = true;
        auto sol = solve_beltrami(BeltramiProblem(std::move(q), std::move(Q)), BoundaryCondition::dirichlet(trace),
                                  opts);
        double rec = 0.0;
        for (int j = 0; j < g->n_radial(); ++j)
            for (int k = 0; k < g->n_angular(); ++k)
                rec = std::max(rec, std::abs(sol.w.at(j, k) - rich_w(g->node(j, k))));
        return rec;
    };
    const double rec_coarse = run_rich(make_disc_grid(32, 128));
    const double rec_fine = run_rich(make_disc_grid(64, 256));
    const double factor = rec_coarse / rec_fine;

    c.pass = worst_res < 1e-8 && worst_rec < 1e-6 && factor >= 4.0;
    c.detail = "max_residual=" + fmt(worst_res) + " max_recovery=" + fmt(worst_rec) +
               " refinement_factor=" + fmt(factor);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 4: taming equivalence over 10^4 samples.
// ---------------------------------------------------------------------------
Criterion criterion_taming() {
    Criterion c;
    c.id = 4;
    c.title = "taming equivalence: sign of omega(V, JV) matches ||A|| < 1 (10^4 samples)";
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> norm_pick(0.05, 1.6);
    std::normal_distribution<double> nrm(0.0, 1.0);
    int mismatches = 0, tested = 0;
    while (tested < 10000) {
        const double target = norm_pick(rng);
        if (std::abs(target - 1.0) < 1e-3) continue;  // off the degenerate boundary
        Mat2c a{{nrm(rng), nrm(rng)}, {nrm(rng), nrm(rng)}, {nrm(rng), nrm(rng)}, {nrm(rng), nrm(rng)}};
        const double s = target / a.operator_norm();
        a.a11 *= s;
        a.a12 *= s;
        a.a21 *= s;
        a.a22 *= s;
        Mat4 j;
        try {
            j = structure_of_matrix_at(a);
        } catch (const DegenerateStructureError&) {
            continue;
        }
        ++tested;
        if (target < 1.0) {
            // Tamed side: every vector must pair positively.
            Vec4 v{nrm(rng), nrm(rng), nrm(rng), nrm(rng)};
            if (omega_st(v, j.apply(v)) <= 0.0) ++mismatches;
        } else {
            // Untamed side: the top singular vector certifies failure.
            const Vec4 v = taming_witness(a);
            if (omega_st(v, j.apply(v)) > 1e-12) ++mismatches;
        }
    }
    c.pass = mismatches == 0;
    c.detail = "samples=" + std::to_string(tested) + " mismatches=" + std::to_string(mismatches);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 5: Lelong bound over 10^3 candidates, equality for lines.
// ---------------------------------------------------------------------------
Criterion criterion_lelong() {
    Criterion c;
    c.id = 5;
    c.title = "Lelong bound: clipped areas >= pi r^2 (1 - 1e-4); line equality to 1e-6";
    std::mt19937_64 rng(55);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        auto cand = random_candidate(rng, 4);
        for (double r : {0.5, 1.0}) {
            if (!lelong_check(cand, r).ok) ++violations;
        }
    }
    double worst_line = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double a = kPi * i / 16.0;
        auto line = AnalyticDiscCandidate::line(std::polar(std::cos(a), 0.4 * i), std::polar(std::sin(a), -0.2 * i),
                                                2.0);
        for (double r : {0.5, 1.0}) {
            auto rep = lelong_check(line, r);
            worst_line = std::max(worst_line, std::abs(rep.margin) / (kPi * r * r));
        }
    }
    c.pass = violations == 0 && worst_line < 1e-6;
    c.detail = "violations=" + std::to_string(violations) + " line_equality_err=" + fmt(worst_line);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 6: rh upper estimates.
// ---------------------------------------------------------------------------
Criterion criterion_rh() {
    Criterion c;
    c.id = 6;
    c.title = "rh estimates: rh(0.8B)=0.8±1e-3, rh(D^2)=1±1e-3, rh(D^2_R)>1";
    std::mt19937_64 rng(77);
    RhOptions opts;
    opts.candidates = 1000;

    const double ball = rh_upper_estimate(DomainSpec::ball(0.8), rng, opts).value;
    const double bidisc = rh_upper_estimate(DomainSpec::complex_bidisc(), rng, opts).value;
    auto real_est = rh_upper_estimate(DomainSpec::real_bidisc(), rng, opts);
    const double margin = real_est.value - 1.0;

    c.pass = std::abs(ball - 0.8) < 1e-3 && std::abs(bidisc - 1.0) < 1e-3 && margin > 1e-3 &&
             real_est.evaluations >= 1000;
    c.detail = "rh(0.8B)=" + fmt(ball) + " rh(D2)=" + fmt(bidisc) + " rh(D2_R)=" + fmt(real_est.value) +
               " margin=" + fmt(margin) + " candidates=" + std::to_string(real_est.evaluations);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 7: squeeze pipeline with the compactly supported shear.
// ---------------------------------------------------------------------------
Criterion criterion_squeeze() {
    Criterion c;
    c.id = 7;
    c.title = "squeeze pipeline: disc area pi ± 1e-3, E(X_n) <= pi + 1e-3, transport gap < 1e-3";
    SqueezeExperiment e = SqueezeExperiment::shear_preset();
    e.grid_radial = 64;
    e.grid_angular = 256;
    e.march.n_tau = 8;
    e.march.threads = 4;
    auto rep = run_squeeze_experiment(e);
    if (!rep.complete) {
        c.detail = "incomplete: " + rep.diagnostic;
        return c;
    }
    bool areas_ok = true;
    for (const auto& st : rep.stages) areas_ok = areas_ok && st.pulled_back_area <= kPi + 1e-3;
    c.pass = rep.max_disc_area_error < 1e-3 && areas_ok && rep.max_transport_gap < 1e-3 &&
             rep.certificate <= 1.0 + 1e-3;
    c.detail = "disc_area_err=" + fmt(rep.max_disc_area_error) + " transport_gap=" + fmt(rep.max_transport_gap) +
               " certificate=" + fmt(rep.certificate) + " taming_margin=" + fmt(rep.pushforward_taming_margin);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 9: symplectic context sanity.
// ---------------------------------------------------------------------------
Criterion criterion_symplectic_sanity() {
    Criterion c;
    c.id = 9;
    c.title = "symplectic sanity: d lambda = omega (1e-6), flows preserve omega (1e-6), Levi form (1e-4)";
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);

    auto ctx = SymplecticContext::standard();
    std::vector<Point2c> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
    const double lambda_defect = exactness_defect(ctx, pts);

    auto shear = HamiltonianMap::planar_shear(0.3, 0.4, 1.0);
    auto generic = make_hamiltonian_map(
        [](const Point2c& p) {
            return 0.15 * p.z.real() * p.w.imag() * smoothstep5(2.0 - std::norm(p.z) - std::norm(p.w));
        },
        1.0);
    double pullback_defect = 0.0;
    for (int i = 0; i < 500; ++i) {
        const Point2c p{{0.6 * u(rng), 0.6 * u(rng)}, {0.6 * u(rng), 0.6 * u(rng)}};
        pullback_defect = std::max(pullback_defect, shear.pullback_defect(p));
        if (i < 100) pullback_defect = std::max(pullback_defect, generic.pullback_defect(p));
    }

    auto j_st = [](const Point2c&) { return Mat4::standard_complex(); };
    auto rho = [](const Point2c& p) { return std::norm(p.z) + std::norm(p.w); };
    double levi_gap = 0.0;
    bool levi_positive = true;
    for (int i = 0; i < 300; ++i) {
        Vec4 v{u(rng), u(rng), u(rng), u(rng)};
        double n2 = 0.0;
        for (double x : v) n2 += x * x;
        if (n2 < 1e-2) continue;
        const double lf = levi_form(rho, {{u(rng), u(rng)}, {u(rng), u(rng)}}, v, j_st).value;
        if (lf <= 0.0) levi_positive = false;
        levi_gap = std::max(levi_gap, std::abs(lf - 4.0 * n2));
    }

    c.pass = lambda_defect < 1e-6 && pullback_defect < 1e-6 && levi_positive && levi_gap < 1e-4;
    c.detail = "dlambda_defect=" + fmt(lambda_defect) + " pullback_defect=" + fmt(pullback_defect) +
               " levi_oracle_gap=" + fmt(levi_gap);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

    std::vector<Criterion> results;
    std::optional<PerturbedRun> perturbed;
    auto need_perturbed = [&]() -> PerturbedRun& {
        if (!perturbed) perturbed = run_perturbed();
        return *perturbed;
    };

    if (wanted(1)) results.push_back(criterion_flat_foliation());
    if (wanted(2)) results.push_back(criterion_perturbed_areas(need_perturbed()));
    if (wanted(3)) results.push_back(criterion_manufactured());
    if (wanted(4)) results.push_back(criterion_taming());
    if (wanted(5)) results.push_back(criterion_lelong());
    if (wanted(6)) results.push_back(criterion_rh());
    if (wanted(7)) results.push_back(criterion_squeeze());
    if (wanted(8)) results.push_back(criterion_admissibility(need_perturbed()));
    if (wanted(9)) results.push_back(criterion_symplectic_sanity());

    std::sort(results.begin(), results.end(), [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
    bool all = true;
    for (const Criterion& c : results) {
        std::printf("%s criterion %d: %s  [%s]\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    c.detail.c_str());
        all = all && c.pass;
    }
    std::printf("%s\n", all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT");
    return all ? 0 : 1;
}
