#include "discfill/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

namespace discfill {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double get_or(const json& j, const char* key, double dflt) {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
}
int get_or(const json& j, const char* key, int dflt) { return j.contains(key) ? j.at(key).get<int>() : dflt; }

class StageClock {
public:
    StageClock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

ContinuationConfig continuation_from(const RunConfig& cfg, const json& block) {
    ContinuationConfig c;
    c.t_start = get_or(block, "t_start", c.t_start);
    c.t_end = get_or(block, "t_end", c.t_end);
    c.initial_step = get_or(block, "initial_step", c.initial_step);
    c.step_floor = get_or(block, "step_floor", c.step_floor);
    c.step_grow = get_or(block, "step_grow", c.step_grow);
    c.step_shrink = get_or(block, "step_shrink", c.step_shrink);
    c.grow_after = get_or(block, "grow_after", c.grow_after);
    c.n_tau = get_or(block, "n_tau", c.n_tau);
    c.R = get_or(block, "R", c.R);
    c.grid_radial = cfg.grid_radial;
    c.grid_angular = cfg.grid_angular;
    c.threads = cfg.threads;
    c.attach.step_tolerance = get_or(block, "step_tolerance", c.attach.step_tolerance);
    c.attach.residual_cap = get_or(block, "residual_cap", c.attach.residual_cap);
    c.attach.max_picard = get_or(block, "max_picard", c.attach.max_picard);
    c.attach.inner.max_iterations = get_or(block, "inner_max_iterations", c.attach.inner.max_iterations);
    return c;
}

int failure_exit(RunManifest& manifest, const fs::path& out_dir, const StageClock& clock, const std::string& what,
                 int code) {
    manifest.status = "failed";
    manifest.extra["error"] = what;
    manifest.wall_seconds = clock.seconds();
    write_manifest(manifest, out_dir);
    std::cerr << "error: " << what << "\n";
    return code;
}

}  // namespace

RunConfig RunConfig::parse(const json& document) {
    RunConfig cfg;
    cfg.raw = document;
    if (!document.contains("schema_version") || document.at("schema_version").get<int>() != 1) {
        throw ConfigError("config: schema_version 1 required");
    }
    if (!document.contains("command")) throw ConfigError("config: missing command");
    cfg.command = document.at("command");
    cfg.seed = document.contains("seed") ? document.at("seed").get<std::uint64_t>() : 1;
    if (document.contains("grid")) {
        cfg.grid_radial = get_or(document.at("grid"), "radial", cfg.grid_radial);
        cfg.grid_angular = get_or(document.at("grid"), "angular", cfg.grid_angular);
    }
    cfg.threads = get_or(document, "threads", 1);
    if (document.contains("output") && document.at("output").contains("format")) {
        cfg.binary_payload = document.at("output").at("format") != "csv";
    }
    cfg.structure = document.contains("structure") ? document.at("structure") : json{{"preset", "standard"}};
    for (const char* key : {"disc", "continuation", "squeeze", "verify"}) {
        if (document.contains(key)) cfg.params[key] = document.at(key);
    }
    if (cfg.grid_radial < 6 || cfg.grid_angular < 8 || (cfg.grid_angular & (cfg.grid_angular - 1)) != 0) {
        throw ConfigError("config: grid.radial must be ≥ 6 and grid.angular a power of two");
    }
    return cfg;
}

TriangularStructure make_structure(const json& spec) {
    const std::string preset = spec.contains("preset") ? spec.at("preset").get<std::string>() : "standard";
    if (preset == "standard") return presets::flat();
    if (preset == "bump") return presets::bump(get_or(spec, "amplitude", 0.3));
    if (preset == "bump-rotsym") return presets::bump_rotation_symmetric(get_or(spec, "amplitude", 0.3));
    if (preset == "bump-weighted") {
        const double a_amp = get_or(spec, "a_amplitude", 0.6 * 0.3);
        const double b_amp = get_or(spec, "b_amplitude", 0.8 * 0.3);
        return presets::bump_weighted(a_amp, b_amp);
    }
    if (preset == "shear-pushforward") {
        auto shear = HamiltonianMap::planar_shear(get_or(spec, "strength", 0.18), get_or(spec, "sigma", 0.4),
                                                  get_or(spec, "time", 1.0));
        auto pushed = pushforward(shear.as_diffeomorphism(), AlmostComplexStructure::standard());
        return TriangularStructure([pushed](Complex z, Complex w) { return pushed.matrix({z, w}).a11; },
                                   [pushed](Complex z, Complex w) { return pushed.matrix({z, w}).a21; },
                                   1.0 - 1e-9);
    }
    if (preset == "hartogs") {
        return presets::hartogs(get_or(spec, "dip", 0.25)).pullback_standard();
    }
    throw ConfigError("config: unknown structure preset '" + preset + "'");
}

int cmd_solve_disc(const RunConfig& cfg, const fs::path& out_dir) {
    StageClock clock;
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.config_echo = cfg.raw;
    try {
        const json block = cfg.params.contains("disc") ? cfg.params.at("disc") : json::object();
        const double t = get_or(block, "t", 0.5);
        const double tau = get_or(block, "tau", 0.0);
        const double R = get_or(block, "R", 1.0);
        TriangularStructure tri = make_structure(cfg.structure);
        manifest.add_stage("structure", "ok");

        auto grid = make_disc_grid(cfg.grid_radial, cfg.grid_angular);
        AttachOptions opts;
        opts.residual_cap = get_or(block, "residual_cap", opts.residual_cap);
        DiscSolution sol = attach_disc(tri, {R, t}, tau, grid, opts);
        manifest.add_stage("attach", "ok");

        const SymplecticContext ctx = SymplecticContext::standard();
        sol.area = area(sol, ctx);
        const double bd_area = boundary_area(sol, ctx);
        auto check = verify_admissible_disc(sol, {R, t});
        write_disc_solution(sol, out_dir / "disc", cfg.binary_payload);
        {
            std::ofstream os(out_dir / "convergence.csv");
            write_history_csv(sol.step_history, "picard_step", os);
        }

        json report;
        report["area"] = sol.area;
        report["boundary_area"] = bd_area;
        report["stokes_gap"] = std::abs(sol.area - bd_area);
        report["residual_norm"] = sol.residual_norm;
        report["boundary_deviation"] = check.boundary_deviation;
        report["winding"] = check.winding;
        report["normalization_error"] = check.normalization_error;
        report["min_abs_w"] = check.min_abs_w;
        report["admissible"] = check.pass;
        {
            std::ofstream os(out_dir / "report.json");
            os << report.dump(2) << "\n";
        }
        manifest.add_stage("verify", check.pass ? "ok" : "failed");
        manifest.extra = report;
        manifest.status = check.pass ? "ok" : "failed";
        manifest.wall_seconds = clock.seconds();
        write_manifest(manifest, out_dir);
        return check.pass ? kExitOk : kExitSolverFailure;
    } catch (const ConfigError& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitConfigError);
    } catch (const TamingError& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitSolverFailure);
    } catch (const std::exception& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitSolverFailure);
    }
}

int cmd_foliate(const RunConfig& cfg, const fs::path& out_dir) {
    StageClock clock;
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.config_echo = cfg.raw;
    try {
        TriangularStructure tri = make_structure(cfg.structure);
        const json block = cfg.params.contains("continuation") ? cfg.params.at("continuation") : json::object();
        ContinuationConfig ccfg = continuation_from(cfg, block);
        manifest.add_stage("configure", "ok");

        Foliation fol;
        try {
            fol = run_continuation(tri, ccfg);
        } catch (const ContinuationBreakdown& bd) {
            manifest.add_stage("continuation", "breakdown");
            manifest.extra["last_good_t"] = bd.last_good_t;
            manifest.extra["diagnostic"] = bd.what();
            manifest.status = "incomplete";
            manifest.wall_seconds = clock.seconds();
            write_manifest(manifest, out_dir);
            std::cerr << "continuation breakdown: " << bd.what() << "\n";
            return kExitSolverFailure;
        }
        manifest.add_stage("continuation", "ok");

        write_foliation_archive(fol, out_dir / "foliation", cfg.binary_payload);
        manifest.add_stage("archive", "ok");

        // Per-disc measurement records: E, L, E/L, and the Stokes gap.
        {
            const SymplecticContext mctx = SymplecticContext::standard().with_structure(tri.as_structure());
            const SymplecticContext actx = SymplecticContext::standard();
            std::ofstream os(out_dir / "measurements.csv");
            os << "level,tau_index,t,tau,area,boundary_area,stokes_gap,boundary_length,area_per_length\n";
            for (int l = 0; l < fol.level_count(); ++l) {
                for (int i = 0; i < fol.tau_count(); ++i) {
                    const DiscSolution& d = fol.disc(l, i);
                    const double e_bd = boundary_area(d, actx);
                    const double len = boundary_length(d, mctx);
                    char line[256];
                    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", l, i,
                                  d.t, d.tau, d.area, e_bd, std::abs(d.area - e_bd), len, d.area / len);
                    os << line;
                }
            }
        }
        manifest.add_stage("measurements", "ok");

        json summary;
        summary["levels"] = fol.level_count();
        summary["taus"] = fol.tau_count();
        summary["all_pass"] = fol.all_pass();
        double area_lo = std::numeric_limits<double>::infinity(), area_hi = 0.0;
        for (int l = 0; l < fol.level_count(); ++l) {
            for (int i = 0; i < fol.tau_count(); ++i) {
                area_lo = std::min(area_lo, fol.disc(l, i).area);
                area_hi = std::max(area_hi, fol.disc(l, i).area);
            }
        }
        summary["disc_area_min"] = area_lo;
        summary["disc_area_max"] = area_hi;
        summary["holder_bound_seen"] = fol.holder_bound_seen;
        manifest.extra = summary;
        manifest.status = fol.all_pass() ? "ok" : "failed";
        manifest.wall_seconds = clock.seconds();
        write_manifest(manifest, out_dir);
        return fol.all_pass() ? kExitOk : kExitSolverFailure;
    } catch (const ConfigError& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitConfigError);
    } catch (const ContinuationError& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitConfigError);
    } catch (const std::exception& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitSolverFailure);
    }
}

int cmd_squeeze(const RunConfig& cfg, const fs::path& out_dir) {
    StageClock clock;
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.config_echo = cfg.raw;
    try {
        const json block = cfg.params.contains("squeeze") ? cfg.params.at("squeeze") : json::object();
        const std::string preset = block.contains("preset") ? block.at("preset").get<std::string>() : "shear";

        if (preset == "rh-probe") {
            const std::string domain_name =
                block.contains("domain") ? block.at("domain").get<std::string>() : "real_bidisc";
            DomainSpec domain = [&] {
                if (domain_name == "ball") return DomainSpec::ball(get_or(block, "radius", 1.0));
                if (domain_name == "complex_bidisc") return DomainSpec::complex_bidisc();
                if (domain_name == "real_bidisc") return DomainSpec::real_bidisc();
                throw ConfigError("squeeze/rh-probe: unknown domain '" + domain_name + "'");
            }();
            RhOptions opts;
            opts.candidates = get_or(block, "candidates", 1000);
            std::mt19937_64 rng(cfg.seed);
            auto est = rh_upper_estimate(domain, rng, opts);
            json report;
            report["domain"] = domain.name();
            report["rh_upper_estimate"] = est.value;
            report["best_area"] = est.best_area;
            report["evaluations"] = est.evaluations;
            report["margin_over_one"] = est.value - 1.0;
            {
                std::ofstream os(out_dir / "rh_probe.json");
                os << report.dump(2) << "\n";
            }
            manifest.add_stage("rh-probe", "ok");
            manifest.extra = report;
            manifest.status = "ok";
            manifest.wall_seconds = clock.seconds();
            write_manifest(manifest, out_dir);
            return kExitOk;
        }

        SqueezeExperiment e = preset == "identity"
                                  ? SqueezeExperiment::identity_preset(get_or(block, "g1_radius", 0.8))
                                  : SqueezeExperiment::shear_preset(get_or(block, "strength", 0.18),
                                                                    get_or(block, "sigma", 0.4));
        if (block.contains("g1_radius")) e.g1_radius = block.at("g1_radius");
        if (block.contains("R")) e.R = block.at("R");
        if (block.contains("exhaustion")) e.exhaustion = block.at("exhaustion").get<std::vector<int>>();
        e.grid_radial = cfg.grid_radial;
        e.grid_angular = cfg.grid_angular;
        e.march.n_tau = get_or(block, "n_tau", 8);
        e.march.threads = cfg.threads;

        auto rep = run_squeeze_experiment(e);
        json report;
        report["complete"] = rep.complete;
        report["R"] = rep.R;
        report["pushforward_taming_margin"] = rep.pushforward_taming_margin;
        report["certificate_rh_upper"] = rep.certificate;
        report["max_disc_area_error"] = rep.max_disc_area_error;
        report["max_transport_gap"] = rep.max_transport_gap;
        json stages = json::array();
        for (const auto& st : rep.stages) {
            stages.push_back({{"n", st.n},
                              {"k_radius", st.k_radius},
                              {"disc_area", st.disc_area},
                              {"clipped_image_area", st.clipped_image_area},
                              {"pulled_back_area", st.pulled_back_area},
                              {"transport_gap", st.transport_gap},
                              {"rh_certificate", st.rh_certificate},
                              {"point_gap", st.point_gap}});
        }
        report["stages"] = stages;
        report["tolerances"] = {{"disc_area", 1e-3}, {"transport_gap", 1e-3}, {"certificate_slack", 1e-3}};
        if (!rep.complete) report["diagnostic"] = rep.diagnostic;
        {
            std::ofstream os(out_dir / "certificate.json");
            os << report.dump(2) << "\n";
        }
        manifest.add_stage("squeeze", rep.complete ? "ok" : "incomplete");
        manifest.extra = report;
        manifest.status = rep.complete ? "ok" : "incomplete";
        manifest.wall_seconds = clock.seconds();
        write_manifest(manifest, out_dir);
        return rep.complete ? kExitOk : kExitCertificateIncomplete;
    } catch (const ConfigError& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitConfigError);
    } catch (const NonsqueezingError& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitConfigError);
    } catch (const std::exception& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitSolverFailure);
    }
}

int cmd_verify(const RunConfig& cfg, const fs::path& out_dir) {
    StageClock clock;
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.config_echo = cfg.raw;
    const json block = cfg.params.contains("verify") ? cfg.params.at("verify") : json::object();
    json summary = json::array();
    bool all_ok = true;

    auto record = [&](const std::string& name, bool ok, const json& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << " " << detail.dump() << "\n";
        summary.push_back({{"suite", name}, {"pass", ok}, {"detail", detail}});
        manifest.add_stage(name, ok ? "ok" : "failed");
        all_ok = all_ok && ok;
    };

    try {
        std::mt19937_64 rng(cfg.seed);

        {  // Taming equivalence: sign of ω(V, JV) against the norm predicate.
            const int samples = get_or(block, "taming_samples", 10000);
            std::uniform_real_distribution<double> norm_pick(0.05, 1.6);
            std::normal_distribution<double> nrm(0.0, 1.0);
            int mismatches = 0, tested = 0;
            for (int i = 0; i < samples; ++i) {
                const double target = norm_pick(rng);
                if (std::abs(target - 1.0) < 1e-3) continue;
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
                    Vec4 v{nrm(rng), nrm(rng), nrm(rng), nrm(rng)};
                    if (omega_st(v, j.apply(v)) <= 0.0) ++mismatches;
                } else {
                    const Vec4 v = taming_witness(a);
                    if (omega_st(v, j.apply(v)) > 1e-12) ++mismatches;
                }
            }
            record("taming-equivalence", mismatches == 0, {{"samples", tested}, {"mismatches", mismatches}});
        }

        {  // Lelong bound over a candidate batch.
            const int candidates = get_or(block, "lelong_candidates", 1000);
            int violations = 0;
            double worst_rel = 0.0;
            for (int i = 0; i < candidates; ++i) {
                auto cand = random_candidate(rng, 4);
                for (double r : {0.5, 1.0}) {
                    auto rep = lelong_check(cand, r);
                    worst_rel = std::max(worst_rel, (rep.bound - rep.area) / rep.bound);
                    if (!rep.ok) ++violations;
                }
            }
            record("lelong-bound", violations == 0,
                   {{"candidates", candidates}, {"violations", violations}, {"worst_deficit", worst_rel}});
        }

        {  // Symplectic context sanity.
            auto ctx = SymplecticContext::standard();
            std::vector<Point2c> pts;
            std::uniform_real_distribution<double> u(-2.0, 2.0);
            for (int i = 0; i < 1000; ++i) pts.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
            const double defect = exactness_defect(ctx, pts);
            record("liouville-exactness", defect < 1e-6, {{"max_defect", defect}});
        }

        {  // Hamiltonian flows preserve ω_st.
            auto shear = HamiltonianMap::planar_shear(0.3, 0.4, 1.0);
            std::uniform_real_distribution<double> u(-0.9, 0.9);
            double worst = 0.0;
            for (int i = 0; i < 1000; ++i) {
                worst = std::max(worst, shear.pullback_defect({{u(rng), u(rng)}, {u(rng), u(rng)}}));
            }
            record("hamiltonian-pullback", worst < 1e-6, {{"max_defect", worst}});
        }

        {  // Levi form positivity for |Z|² with oracle agreement.
            auto j_st = [](const Point2c&) { return Mat4::standard_complex(); };
            auto rho = [](const Point2c& p) { return std::norm(p.z) + std::norm(p.w); };
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            double worst_gap = 0.0;
            bool positive = true;
            for (int i = 0; i < 200; ++i) {
                Vec4 v{u(rng), u(rng), u(rng), u(rng)};
                double n2 = 0.0;
                for (double x : v) n2 += x * x;
                if (n2 < 1e-3) continue;
                const double lf = levi_form(rho, {{u(rng), u(rng)}, {u(rng), u(rng)}}, v, j_st).value;
                if (lf <= 0.0) positive = false;
                worst_gap = std::max(worst_gap, std::abs(lf - 4.0 * n2));
            }
            record("levi-positivity", positive && worst_gap < 1e-4, {{"max_oracle_gap", worst_gap}});
        }

        {  // Grid calculus invariants.
            auto grid = make_disc_grid(cfg.grid_radial, cfg.grid_angular);
            auto f = GridFunction::sample(grid, [](Complex z) { return std::exp(z) + 0.5 * std::conj(z) * z; });
            auto conj_route = map_values(d_z(map_values(f, [](Complex v) { return std::conj(v); })),
                                         [](Complex v) { return std::conj(v); });
            auto direct = d_zbar(f);
            double gap = 0.0;
            for (std::size_t i = 0; i < direct.size(); ++i)
                gap = std::max(gap, std::abs(direct.values()[i] - conj_route.values()[i]));
            const double quad = std::abs(integrate(GridFunction::constant(grid, {1.0, 0.0})) - kPi);
            record("grid-calculus", gap < 1e-12 && quad < 1e-12, {{"conjugation_gap", gap}, {"quadrature_gap", quad}});
        }

        json out;
        out["suites"] = summary;
        out["all_pass"] = all_ok;
        {
            std::ofstream os(out_dir / "verify.json");
            os << out.dump(2) << "\n";
        }
        manifest.extra = out;
        manifest.status = all_ok ? "ok" : "failed";
        manifest.wall_seconds = clock.seconds();
        write_manifest(manifest, out_dir);
        return all_ok ? kExitOk : kExitSolverFailure;
    } catch (const std::exception& e) {
        return failure_exit(manifest, out_dir, clock, e.what(), kExitSolverFailure);
    }
}

int run_command(const RunConfig& cfg, const fs::path& out_dir) {
    if (cfg.command == "solve-disc") return cmd_solve_disc(cfg, out_dir);
    if (cfg.command == "foliate") return cmd_foliate(cfg, out_dir);
    if (cfg.command == "squeeze") return cmd_squeeze(cfg, out_dir);
    if (cfg.command == "verify") return cmd_verify(cfg, out_dir);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

}  // namespace discfill
