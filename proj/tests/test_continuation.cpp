#include "doctest.h"

#include <cmath>
#include <numbers>

#include "discfill/continuation.hpp"
#include "discfill/symplectic.hpp"
#include "discfill/presets.hpp"

using namespace discfill;

namespace {
constexpr double kPi = std::numbers::pi;

ContinuationConfig small_config() {
    ContinuationConfig cfg;
    cfg.grid_radial = 32;
    cfg.grid_angular = 128;
    cfg.n_tau = 8;
    cfg.attach.residual_cap = 1e-2;
    return cfg;
}

const TriangularStructure& bump_structure() {
    static const TriangularStructure tri = presets::bump(0.3);
    return tri;
}

// The perturbed family is reused by several cases below.
const Foliation& bump_foliation() {
    static const Foliation fol = run_continuation(bump_structure(), small_config());
    return fol;
}
}  // namespace

TEST_CASE("flat continuation: every disc is the constant disc") {
    // 16 τ-values at this resolution would sit closer than the (coarse)
    // 2Δr separation threshold at t = 0.1; the full 64x256 run in the
    // acceptance suite uses 16.
    ContinuationConfig cfg = small_config();
    auto fol = run_continuation(presets::flat(), cfg);
    CHECK(fol.all_pass());
    CHECK(fol.t_levels.front() == doctest::Approx(0.1));
    CHECK(fol.t_levels.back() == doctest::Approx(1.0));

    for (int l = 0; l < fol.level_count(); ++l) {
        const double t = fol.t_levels[static_cast<std::size_t>(l)];
        for (int i = 0; i < fol.tau_count(); ++i) {
            const DiscSolution& d = fol.disc(l, i);
            const Complex expect = std::polar(t, fol.taus[static_cast<std::size_t>(i)]);
            double err = 0.0;
            for (const Complex& v : d.w.values()) err = std::max(err, std::abs(v - expect));
            CHECK(err < 1e-8);
            CHECK(std::abs(d.area - kPi) < 1e-8);
        }
        CHECK(fol.reports[static_cast<std::size_t>(l)].max_holder < 1e-10);
    }
}

TEST_CASE("flat foliation covers sample points exactly") {
    ContinuationConfig cfg = small_config();
    auto fol = run_continuation(presets::flat(), cfg);

    // (0.5, 0.5 e^{i}) lies on the (t, τ) = (0.5, 1) disc.
    auto found = find_disc_through(fol, presets::flat(), {{0.5, 0.0}, std::polar(0.5, 1.0)});
    CHECK(found.gap < 1e-9);
    CHECK(found.disc.t == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::fmod(found.disc.tau + 2.0 * kPi, 2.0 * kPi) == doctest::Approx(1.0).epsilon(1e-8));

    // A point below the computed range is reported, not an error.
    std::vector<Point2c> pts = {{{0.5, 0.0}, std::polar(0.5, 1.0)}, {{0.1, 0.0}, {0.01, 0.0}}};
    auto cover = check_foliation_cover(fol, presets::flat(), pts);
    CHECK(cover.outside_range == 1);
    CHECK(cover.max_gap < 1e-7);
    CHECK(cover.pass);
}

TEST_CASE("perturbed continuation: admissibility and areas") {
    const Foliation& fol = bump_foliation();
    ContinuationConfig cfg = small_config();
    CHECK(fol.all_pass());
    CHECK(fol.t_levels.back() == doctest::Approx(1.0));

    bool saw_nonflat = false;
    for (int l = 0; l < fol.level_count(); ++l) {
        const auto& rep = fol.reports[static_cast<std::size_t>(l)];
        CHECK(rep.max_boundary_deviation < 1e-8);
        CHECK(rep.max_abs_winding == 0);
        CHECK(rep.min_abs_w > 0.0);
        CHECK(rep.min_same_level_distance > rep.separation_threshold);
        CHECK(rep.cover_gap < rep.cover_threshold);
        for (int i = 0; i < fol.tau_count(); ++i) {
            const DiscSolution& d = fol.disc(l, i);
            CHECK(std::abs(d.area - kPi) < 1e-3);
            const Complex flat = std::polar(d.t, d.tau);
            for (const Complex& v : d.w.values())
                if (std::abs(v - flat) > 1e-3) saw_nonflat = true;
        }
    }
    CHECK(saw_nonflat);  // the family genuinely bends through the bump

    // Hölder monitor stays bounded across the march.
    CHECK(fol.holder_bound_seen < 10.0);

    // Monotone ordering of levels in the fibers.
    for (int l = 0; l + 1 < fol.level_count(); ++l) {
        double upper_min = std::numeric_limits<double>::infinity();
        double lower_max = 0.0;
        for (int i = 0; i < fol.tau_count(); ++i) {
            upper_min = std::min(upper_min, fol.disc(l + 1, i).min_abs_w);
            lower_max = std::max(lower_max, fol.disc(l, i).max_abs_w);
        }
        CHECK(fol.reports[static_cast<std::size_t>(l) + 1].min_cross_level_distance > 0.0);
        (void)upper_min;
        (void)lower_max;
    }

    // τ-continuity: neighbouring discs differ by O(Δτ).
    const double dtau = 2.0 * kPi / cfg.n_tau;
    for (int l = 0; l < fol.level_count(); ++l) {
        for (int i = 0; i < fol.tau_count(); ++i) {
            const auto& a = fol.disc(l, i).w;
            const auto& b = fol.disc(l, (i + 1) % fol.tau_count()).w;
            double diff = 0.0;
            for (std::size_t n = 0; n < a.size(); ++n) diff = std::max(diff, std::abs(a.values()[n] - b.values()[n]));
            CHECK(diff < 1.5 * fol.t_levels[static_cast<std::size_t>(l)] * dtau);
        }
    }
}

TEST_CASE("perturbed foliation covers random shell points") {
    const auto& tri = bump_structure();
    const Foliation& fol = bump_foliation();

    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> uz(-0.6, 0.6), ut(0.25, 0.9), uph(0.0, 2.0 * kPi);
    std::vector<Point2c> pts;
    for (int i = 0; i < 20; ++i) {
        Complex z{uz(rng), uz(rng)};
        auto found = find_disc_through(fol, tri, {z, std::polar(ut(rng), uph(rng))}, 1e-8);
        CHECK(found.gap < 1e-7);
        (void)found;
    }
}

TEST_CASE("leviflat probe: one disc per sampled point, constructed anomaly flagged") {
    const auto& tri = bump_structure();
    const Foliation& fol = bump_foliation();
    std::mt19937_64 rng(7);
    const int level = fol.nearest_level(0.5);
    auto rep = leviflat_probe(fol, tri, level, 60, rng);
    CHECK(rep.samples == 60);
    CHECK(rep.anomalies == 0);
    CHECK(rep.pass);

    // Duplicate disc: multiplicity 2 at its own points must be flagged.
    Foliation broken = fol;
    broken.discs[static_cast<std::size_t>(level)][1] = broken.discs[static_cast<std::size_t>(level)][0];
    std::mt19937_64 rng2(7);
    auto rep2 = leviflat_probe(broken, tri, level, 60, rng2);
    CHECK(rep2.anomalies > 0);
    CHECK(!rep2.pass);
}

TEST_CASE("restart stability reproduces the discs") {
    const auto& tri = bump_structure();
    const Foliation& fol = bump_foliation();
    std::mt19937_64 rng(11);
    auto rep = restart_stability_probe(fol, tri, 6, rng);
    MESSAGE("restart max deviation ", rep.max_deviation);
    CHECK(rep.probes == 6);
    CHECK(rep.max_deviation < 1e-6);
}

TEST_CASE("areas stay controlled by boundary lengths across the family") {
    const Foliation& fol = bump_foliation();
    const SymplecticContext ctx = SymplecticContext::standard();
    double worst_ratio = 0.0;
    for (int l = 0; l < fol.level_count(); ++l) {
        for (int i = 0; i < fol.tau_count(); ++i) {
            const double len = boundary_length(fol.disc(l, i), ctx);
            CHECK(len > 0.0);
            worst_ratio = std::max(worst_ratio, fol.disc(l, i).area / len);
        }
    }
    // The empirical isoperimetric constant of the run (π/2π = 1/2 for flat
    // discs) stays of order one.
    MESSAGE("empirical E/L bound ", worst_ratio);
    CHECK(worst_ratio < 1.0);
}

TEST_CASE("hartogs model family marches with nontrivial fibers") {
    ContinuationConfig cfg = small_config();
    cfg.t_start = 0.3;
    cfg.t_end = 0.7;
    auto tri = presets::hartogs(0.25).pullback_standard();
    auto fol = run_continuation(tri, cfg);
    CHECK(fol.all_pass());
    bool bent = false;
    for (int i = 0; i < fol.tau_count(); ++i) {
        const DiscSolution& d = fol.disc(fol.level_count() - 1, i);
        const Complex flat = std::polar(d.t, d.tau);
        for (const Complex& v : d.w.values())
            if (std::abs(v - flat) > 1e-3) bent = true;
    }
    CHECK(bent);
}

TEST_CASE("taming-margin stress run breaks down with a diagnostic") {
    ContinuationConfig cfg;
    cfg.grid_radial = 16;
    cfg.grid_angular = 64;
    cfg.n_tau = 4;
    cfg.t_start = 0.15;
    cfg.attach.max_picard = 10;
    cfg.attach.inner.max_iterations = 60;
    cfg.attach.residual_cap = 1e-2;
    // |a| reaches 0.9908 on the plateau; the inner contraction stalls there.
    auto hostile = TriangularStructure(
        [](Complex z, Complex w) {
            return 0.9908 * smoothstep5((0.48 - std::abs(z)) / 0.18) *
                   smoothstep5((std::abs(w) - 0.26) / 0.16) * smoothstep5((0.74 - std::abs(w)) / 0.16);
        },
        [](Complex z, Complex w) {
            return Complex{0.08, 0.0} * smoothstep5((0.48 - std::abs(z)) / 0.18) *
                   smoothstep5((std::abs(w) - 0.26) / 0.16) * smoothstep5((0.74 - std::abs(w)) / 0.16);
        },
        0.991);
    bool threw = false;
    try {
        run_continuation(hostile, cfg);
    } catch (const ContinuationBreakdown& e) {
        threw = true;
        CHECK(e.last_good_t >= 0.15);
        CHECK(e.last_good_t < 0.6);
    }
    CHECK(threw);
}

TEST_CASE("config validation") {
    ContinuationConfig bad;
    bad.t_start = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContinuationError);
    bad = ContinuationConfig{};
    bad.t_end = 1.2;
    CHECK_THROWS_AS(bad.validate(), ContinuationError);
}
