#include "doctest.h"

#include <cmath>
#include <numbers>

#include "discfill/attach.hpp"
#include "discfill/presets.hpp"

using namespace discfill;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("flat structure returns the constant disc for every (t, tau)") {
    auto grid = make_disc_grid(24, 64);
    auto flat = presets::flat();
    for (int it = 0; it < 8; ++it) {
        for (int is = 0; is < 16; ++is) {
            const double t = 0.1 + 0.9 * it / 7.0;
            const double tau = 2.0 * kPi * is / 16.0;
            auto sol = attach_disc(flat, {1.0, t}, tau, grid);
            const Complex expect = std::polar(t, tau);
            double err = 0.0;
            for (const Complex& v : sol.w.values()) err = std::max(err, std::abs(v - expect));
            CHECK(err < 1e-10);
            CHECK(sol.residual_norm < 1e-10);
            CHECK(sol.winding == 0);
        }
    }
}

TEST_CASE("structure supported away from the torus leaves big-t discs flat") {
    auto grid = make_disc_grid(48, 128);
    auto tri = presets::bump(0.3);
    auto sol = attach_disc(tri, {1.0, 0.9}, 0.4, grid);
    const Complex expect = std::polar(0.9, 0.4);
    double err = 0.0;
    for (const Complex& v : sol.w.values()) err = std::max(err, std::abs(v - expect));
    CHECK(err < 1e-10);

    // Independent residual evaluation on a 2x finer grid.
    auto fine = make_disc_grid(96, 256);
    const double fine_res = graph_residual(tri, {1.0, 0.9}, interpolate_to(sol.w, fine));
    CHECK(fine_res < 1e-5);
}

TEST_CASE("bump-perturbed disc converges and passes the fine-grid residual oracle") {
    auto grid = make_disc_grid(64, 256);
    auto tri = presets::bump(0.3);
    const TorusTarget target{1.0, 0.5};
    auto sol = attach_disc(tri, target, 0.7, grid);
    MESSAGE("picard iters ", sol.picard_iterations, " residual ", sol.residual_norm, " min|w| ", sol.min_abs_w);
    CHECK(sol.residual_norm < 1e-3);
    CHECK(sol.boundary_deviation < 1e-8);
    CHECK(sol.winding == 0);
    CHECK(sol.normalization_error < 1e-10);
    CHECK(sol.min_abs_w > 0.0);
    // The solve is genuinely nonlinear here: the disc is not flat.
    double flat_dist = 0.0;
    for (const Complex& v : sol.w.values()) flat_dist = std::max(flat_dist, std::abs(v - std::polar(0.5, 0.7)));
    CHECK(flat_dist > 1e-4);

    // Independent residual evaluation on a 2x finer grid: a genuine
    // solution keeps a comparable residual there, a grid artifact would
    // blow up with the refined difference operators.
    auto fine = make_disc_grid(128, 512);
    auto w_fine = interpolate_to(sol.w, fine);
    const double fine_res = graph_residual(tri, target, w_fine);
    MESSAGE("fine-grid residual ", fine_res);
    CHECK(fine_res < 2.0 * sol.residual_norm);
}

TEST_CASE("residual stays small under grid refinement of the solver itself") {
    auto tri = presets::bump(0.3);
    const TorusTarget target{1.0, 0.55};
    AttachOptions loose;
    loose.residual_cap = 1e-2;  // the coarse grid resolves the cutoff ramps less well
    auto sol_c = attach_disc(tri, target, 0.2, make_disc_grid(32, 128), loose);
    auto sol_f = attach_disc(tri, target, 0.2, make_disc_grid(64, 256));
    MESSAGE("residuals coarse ", sol_c.residual_norm, " fine ", sol_f.residual_norm);
    // The residual floor tracks the scheme order under refinement.
    CHECK(sol_f.residual_norm * 4.0 <= sol_c.residual_norm);
    // Solutions agree where both grids resolve the disc.
    double diff = 0.0;
    auto wc_on_fine = interpolate_to(sol_c.w, sol_f.w.grid_ptr());
    for (std::size_t i = 0; i < wc_on_fine.size(); ++i)
        diff = std::max(diff, std::abs(wc_on_fine.values()[i] - sol_f.w.values()[i]));
    MESSAGE("coarse-fine disc difference ", diff);
    CHECK(diff < 2e-4);
}

TEST_CASE("phase equivariance for rotation-symmetric structures") {
    auto grid = make_disc_grid(48, 128);
    auto tri = presets::bump_rotation_symmetric(0.3);
    const double sigma = 1.1;
    auto s0 = attach_disc(tri, {1.0, 0.5}, 0.3, grid);
    auto s1 = attach_disc(tri, {1.0, 0.5}, 0.3 + sigma, grid);
    const Complex rot = std::polar(1.0, sigma);
    double err = 0.0;
    for (std::size_t i = 0; i < s0.w.size(); ++i)
        err = std::max(err, std::abs(s1.w.values()[i] - rot * s0.w.values()[i]));
    CHECK(err < 1e-9);
}

TEST_CASE("verify_admissible_disc flags constructed failures") {
    auto grid = make_disc_grid(24, 64);
    auto flat_sol = attach_disc(presets::flat(), {1.0, 0.5}, 0.9, grid);
    auto rep = verify_admissible_disc(flat_sol, {1.0, 0.5});
    CHECK(rep.pass);
    CHECK(rep.boundary_deviation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.winding == 0);
    CHECK(rep.embedding_separation > 0.0);

    // Injected winding-1 disc: w = t z (boundary circles the origin once).
    DiscSolution bad = flat_sol;
    bad.w = GridFunction::sample(grid.operator->()->is_disc() ? grid : grid, [](Complex z) { return 0.5 * z; });
    bad.t = 0.5;
    auto rep_bad = verify_admissible_disc(bad, {1.0, 0.5});
    CHECK(rep_bad.winding == 1);
    CHECK(!rep_bad.winding_ok);
    CHECK(!rep_bad.pass);
}

TEST_CASE("bad seeds are rejected") {
    auto grid = make_disc_grid(24, 64);
    auto tri = presets::bump(0.3);

    auto winding_seed = GridFunction::sample(grid, [](Complex z) { return 0.5 * z + Complex{0.001, 0.0}; });
    CHECK_THROWS_AS(attach_disc(tri, {1.0, 0.5}, 0.0, grid, {}, &winding_seed), HomotopyClassError);

    auto zero_seed = GridFunction::constant(grid, {0.5, 0.0});
    zero_seed.at(3, 7) = Complex{0.0, 0.0};
    CHECK_THROWS_AS(attach_disc(tri, {1.0, 0.5}, 0.0, grid, {}, &zero_seed), DegeneracyError);
}

TEST_CASE("attach failure reports the last residual for hostile structures") {
    auto grid = make_disc_grid(24, 64);
    // Taming margin near zero: the inner problem is barely elliptic and the
    // Picard loop cannot make progress.
    auto hostile = presets::bump(0.999);
    AttachOptions opts;
    opts.max_picard = 8;
    bool threw = false;
    try {
        attach_disc(hostile, {1.0, 0.5}, 0.0, grid, opts);
    } catch (const AttachFailure& e) {
        threw = true;
        CHECK(e.last_residual > 0.0);
    } catch (const DivergenceError&) {
        threw = true;  // inner sweep may detect the stall first
    }
    CHECK(threw);
}

TEST_CASE("torus targets are totally real for tamed structures") {
    auto tri = presets::bump(0.3);
    CHECK(totally_real_margin({1.0, 0.5}, tri.as_structure()) > 1e-3);
    CHECK(totally_real_margin({1.0, 1.0}, AlmostComplexStructure::standard()) > 1e-3);
}

TEST_CASE("interpolate_to reproduces smooth fields") {
    auto coarse = make_disc_grid(32, 128);
    auto fine = make_disc_grid(64, 256);
    auto f = GridFunction::sample(coarse, [](Complex z) { return std::exp(z) * std::conj(z) + 0.2 * z * z; });
    auto lifted = interpolate_to(f, fine);
    double err = 0.0;
    for (int j = 0; j < fine->n_radial(); ++j)
        for (int k = 0; k < fine->n_angular(); ++k) {
            const Complex z = fine->node(j, k);
            err = std::max(err, std::abs(lifted.at(j, k) - (std::exp(z) * std::conj(z) + 0.2 * z * z)));
        }
    CHECK(err < 1e-9);
}
