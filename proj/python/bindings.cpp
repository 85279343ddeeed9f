#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "discfill/continuation.hpp"
#include "discfill/io.hpp"
#include "discfill/nonsqueezing.hpp"
#include "discfill/presets.hpp"
#include "discfill/runner.hpp"

namespace py = pybind11;
using namespace discfill;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

// Value wrapper: pybind11 holders do not carry shared_ptr<const T>.
struct PyGrid {
    GridPtr ptr;
    const PolarGrid& get() const { return *ptr; }
};

GridFunction to_grid_function(const GridPtr& grid, const ComplexArray& values) {
    if (values.ndim() != 2 || values.shape(0) != grid->n_radial() || values.shape(1) != grid->n_angular()) {
        throw py::value_error("expected a (n_radial, n_angular) complex array");
    }
    GridFunction f(grid);
    auto r = values.unchecked<2>();
    for (int j = 0; j < grid->n_radial(); ++j)
        for (int k = 0; k < grid->n_angular(); ++k) f.at(j, k) = r(j, k);
    return f;
}

ComplexArray from_grid_function(const GridFunction& f) {
    const PolarGrid& g = f.grid();
    ComplexArray out({g.n_radial(), g.n_angular()});
    auto r = out.mutable_unchecked<2>();
    for (int j = 0; j < g.n_radial(); ++j)
        for (int k = 0; k < g.n_angular(); ++k) r(j, k) = f.at(j, k);
    return out;
}

TriangularStructure structure_from_name(const std::string& preset, double amplitude) {
    nlohmann::json spec;
    spec["preset"] = preset;
    spec["amplitude"] = amplitude;
    return make_structure(spec);
}

AnalyticDiscCandidate candidate_from(const std::vector<Complex>& cz, const std::vector<Complex>& cw, double rho) {
    AnalyticDiscCandidate c;
    c.coeff_z = cz;
    c.coeff_w = cw;
    c.rho = rho;
    return c;
}

DomainSpec domain_from_name(const std::string& name, double radius) {
    if (name == "ball") return DomainSpec::ball(radius);
    if (name == "cylinder") return DomainSpec::cylinder(radius);
    if (name == "complex_bidisc") return DomainSpec::complex_bidisc();
    if (name == "real_bidisc") return DomainSpec::real_bidisc();
    throw py::value_error("unknown domain '" + name + "'");
}

py::dict disc_to_dict(const DiscSolution& sol) {
    py::dict d;
    d["w"] = from_grid_function(sol.w);
    d["R"] = sol.R;
    d["t"] = sol.t;
    d["tau"] = sol.tau;
    d["residual_norm"] = sol.residual_norm;
    d["boundary_deviation"] = sol.boundary_deviation;
    d["normalization_error"] = sol.normalization_error;
    d["winding"] = sol.winding;
    d["min_abs_w"] = sol.min_abs_w;
    d["area"] = sol.area;
    d["picard_iterations"] = sol.picard_iterations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_discfill, m) {
    m.doc() = "Pseudoholomorphic disc filling, Beltrami solvers, and symplectic non-squeezing experiments";

    py::register_exception<GridError>(m, "GridError");
    py::register_exception<BeltramiError>(m, "BeltramiError");
    py::register_exception<AttachError>(m, "AttachError");
    py::register_exception<ContinuationError>(m, "ContinuationError");
    py::register_exception<NonsqueezingError>(m, "NonsqueezingError");

    py::class_<PyGrid>(m, "PolarGrid")
        .def_property_readonly("n_radial", [](const PyGrid& g) { return g.get().n_radial(); })
        .def_property_readonly("n_angular", [](const PyGrid& g) { return g.get().n_angular(); })
        .def_property_readonly("inner_radius", [](const PyGrid& g) { return g.get().inner_radius(); })
        .def_property_readonly("outer_radius", [](const PyGrid& g) { return g.get().outer_radius(); })
        .def_property_readonly("radii", [](const PyGrid& g) { return g.get().radii(); })
        .def("theta", [](const PyGrid& g, int k) { return g.get().theta(k); })
        .def("quadrature_weight", [](const PyGrid& g, int j) { return g.get().quadrature_weight(j); })
        .def("nodes",
             [](const PyGrid& pg) {
                 const PolarGrid& g = pg.get();
                 ComplexArray out({g.n_radial(), g.n_angular()});
                 auto r = out.mutable_unchecked<2>();
                 for (int j = 0; j < g.n_radial(); ++j)
                     for (int k = 0; k < g.n_angular(); ++k) r(j, k) = g.node(j, k);
                 return out;
             })
        .def("__repr__", [](const PyGrid& pg) {
            const PolarGrid& g = pg.get();
            return "<PolarGrid " + std::string(g.is_disc() ? "disc" : "annulus") + " " +
                   std::to_string(g.n_radial()) + "x" + std::to_string(g.n_angular()) + ">";
        });

    m.def(
        "disc_grid", [](int nr, int na) { return PyGrid{make_disc_grid(nr, na)}; }, py::arg("n_radial") = 64,
        py::arg("n_angular") = 256);
    m.def(
        "annulus_grid",
        [](double inner, int nr, int na, double outer) { return PyGrid{make_annulus_grid(inner, nr, na, outer)}; },
        py::arg("inner_radius"), py::arg("n_radial"), py::arg("n_angular"), py::arg("outer_radius") = 1.0);

    m.def(
        "d_z",
        [](const PyGrid& grid, const ComplexArray& values) {
            return from_grid_function(d_z(to_grid_function(grid.ptr, values)));
        },
        py::arg("grid"), py::arg("values"));
    m.def(
        "d_zbar",
        [](const PyGrid& grid, const ComplexArray& values) {
            return from_grid_function(d_zbar(to_grid_function(grid.ptr, values)));
        },
        py::arg("grid"), py::arg("values"));
    m.def(
        "integrate",
        [](const PyGrid& grid, const ComplexArray& values) { return integrate(to_grid_function(grid.ptr, values)); },
        py::arg("grid"), py::arg("values"));
    m.def(
        "winding_number",
        [](const std::vector<Complex>& curve) { return winding_number(curve); }, py::arg("curve"));
    m.def(
        "cauchy_green",
        [](const PyGrid& grid, const ComplexArray& values) {
            return from_grid_function(cauchy_green(to_grid_function(grid.ptr, values)));
        },
        py::arg("grid"), py::arg("values"),
        "Particular solution u of du/dzbar = g via the Cauchy-Green transform");

    m.def(
        "solve_beltrami",
        [](const PyGrid& grid, const ComplexArray& q, const ComplexArray& Q, const std::vector<Complex>& trace,
           double tolerance) {
            SolveOptions opts;
            opts.tolerance = tolerance;
            opts.stop_at_floor = true;
            auto sol = solve_beltrami(BeltramiProblem(to_grid_function(grid.ptr, q), to_grid_function(grid.ptr, Q)),
                                      BoundaryCondition::dirichlet(trace), opts);
            py::dict d;
            d["w"] = from_grid_function(sol.w);
            d["residual_norm"] = sol.residual_norm;
            d["iterations"] = sol.iterations;
            d["reached_tolerance"] = sol.reached_tolerance;
            return d;
        },
        py::arg("grid"), py::arg("q"), py::arg("Q"), py::arg("dirichlet_trace"), py::arg("tolerance") = 1e-10,
        "Solve w_zbar = q w_z + Q with a Dirichlet boundary trace");

    m.def(
        "attach_disc",
        [](const std::string& preset, double amplitude, double t, double tau, int n_radial, int n_angular,
           double residual_cap) {
            auto tri = structure_from_name(preset, amplitude);
            AttachOptions opts;
            opts.residual_cap = residual_cap;
            auto grid = make_disc_grid(n_radial, n_angular);
            auto sol = attach_disc(tri, {1.0, t}, tau, grid, opts);
            sol.area = area(sol, SymplecticContext::standard());
            py::dict d = disc_to_dict(sol);
            d["boundary_area"] = boundary_area(sol, SymplecticContext::standard());
            return d;
        },
        py::arg("preset") = "standard", py::arg("amplitude") = 0.3, py::arg("t") = 0.5, py::arg("tau") = 0.0,
        py::arg("n_radial") = 64, py::arg("n_angular") = 256, py::arg("residual_cap") = 1e-3,
        "Attach a holomorphic disc with boundary on the torus |z| = 1, |w| = t");

    m.def(
        "run_continuation",
        [](const std::string& preset, double amplitude, double t_start, double t_end, int n_tau, int n_radial,
           int n_angular, int threads) {
            auto tri = structure_from_name(preset, amplitude);
            ContinuationConfig cfg;
            cfg.t_start = t_start;
            cfg.t_end = t_end;
            cfg.n_tau = n_tau;
            cfg.grid_radial = n_radial;
            cfg.grid_angular = n_angular;
            cfg.threads = threads;
            cfg.attach.residual_cap = 1e-2;
            auto fol = run_continuation(tri, cfg);
            py::dict d;
            d["t_levels"] = fol.t_levels;
            d["taus"] = fol.taus;
            d["all_pass"] = fol.all_pass();
            d["holder_bound_seen"] = fol.holder_bound_seen;
            std::vector<std::vector<double>> areas(static_cast<std::size_t>(fol.level_count()));
            for (int l = 0; l < fol.level_count(); ++l)
                for (int i = 0; i < fol.tau_count(); ++i)
                    areas[static_cast<std::size_t>(l)].push_back(fol.disc(l, i).area);
            d["areas"] = areas;
            return d;
        },
        py::arg("preset") = "standard", py::arg("amplitude") = 0.3, py::arg("t_start") = 0.1,
        py::arg("t_end") = 1.0, py::arg("n_tau") = 8, py::arg("n_radial") = 32, py::arg("n_angular") = 128,
        py::arg("threads") = 1, "March the disc family in t and report per-disc areas and admissibility");

    m.def(
        "clipped_area",
        [](const std::vector<Complex>& cz, const std::vector<Complex>& cw, double rho, const std::string& domain,
           double radius) { return clipped_area(candidate_from(cz, cw, rho), domain_from_name(domain, radius)); },
        py::arg("coeff_z"), py::arg("coeff_w"), py::arg("rho") = 1.0, py::arg("domain") = "ball",
        py::arg("radius") = 1.0, "Euclidean area of the polynomial candidate clipped to the domain");

    m.def(
        "lelong_check",
        [](const std::vector<Complex>& cz, const std::vector<Complex>& cw, double rho, double r) {
            auto rep = lelong_check(candidate_from(cz, cw, rho), r);
            py::dict d;
            d["area"] = rep.area;
            d["bound"] = rep.bound;
            d["margin"] = rep.margin;
            d["ok"] = rep.ok;
            return d;
        },
        py::arg("coeff_z"), py::arg("coeff_w"), py::arg("rho") = 1.0, py::arg("r") = 1.0);

    m.def(
        "rh_upper_estimate",
        [](const std::string& domain, double radius, int candidates, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            RhOptions opts;
            opts.candidates = candidates;
            auto est = rh_upper_estimate(domain_from_name(domain, radius), rng, opts);
            py::dict d;
            d["value"] = est.value;
            d["best_area"] = est.best_area;
            d["evaluations"] = est.evaluations;
            return d;
        },
        py::arg("domain"), py::arg("radius") = 1.0, py::arg("candidates") = 300, py::arg("seed") = 1);

    m.def(
        "run_squeeze",
        [](const std::string& preset, double g1_radius, std::vector<int> exhaustion, int n_radial, int n_angular,
           int n_tau) {
            SqueezeExperiment e = preset == "identity" ? SqueezeExperiment::identity_preset(g1_radius)
                                                       : SqueezeExperiment::shear_preset();
            if (preset != "identity") e.g1_radius = g1_radius;
            if (!exhaustion.empty()) e.exhaustion = std::move(exhaustion);
            e.grid_radial = n_radial;
            e.grid_angular = n_angular;
            e.march.n_tau = n_tau;
            auto rep = run_squeeze_experiment(e);
            py::dict d;
            d["complete"] = rep.complete;
            d["R"] = rep.R;
            d["certificate"] = rep.certificate;
            d["max_disc_area_error"] = rep.max_disc_area_error;
            d["max_transport_gap"] = rep.max_transport_gap;
            py::list stages;
            for (const auto& st : rep.stages) {
                py::dict s;
                s["n"] = st.n;
                s["disc_area"] = st.disc_area;
                s["pulled_back_area"] = st.pulled_back_area;
                s["transport_gap"] = st.transport_gap;
                stages.append(s);
            }
            d["stages"] = stages;
            return d;
        },
        py::arg("preset") = "identity", py::arg("g1_radius") = 0.8, py::arg("exhaustion") = std::vector<int>{2, 4},
        py::arg("n_radial") = 32, py::arg("n_angular") = 128, py::arg("n_tau") = 6,
        "Run the non-squeezing pipeline and report the rh certificate");

    m.def(
        "is_tamed",
        [](const std::string& preset, double amplitude, int samples, std::uint64_t seed) {
            auto tri = structure_from_name(preset, amplitude);
            std::mt19937_64 rng(seed);
            auto rep = is_tamed(tri.as_structure(), presets::bump_support_box(), samples, rng);
            py::dict d;
            d["tamed"] = rep.tamed;
            d["max_norm"] = rep.max_norm;
            d["margin"] = rep.margin;
            return d;
        },
        py::arg("preset") = "bump", py::arg("amplitude") = 0.3, py::arg("samples") = 1000, py::arg("seed") = 1);

    m.attr("__version__") = "0.1.0";
}
