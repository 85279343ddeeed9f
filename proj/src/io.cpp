#include "discfill/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace discfill {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json grid_descriptor(const PolarGrid& g) {
    json j;
    j["kind"] = g.is_disc() ? "disc" : "annulus";
    j["n_radial"] = g.n_radial();
    j["n_angular"] = g.n_angular();
    j["inner_radius"] = g.inner_radius();
    j["outer_radius"] = g.outer_radius();
    if (!g.is_disc()) j["radii"] = g.radii();
    return j;
}

GridPtr grid_from_descriptor(const json& j) {
    const std::string kind = j.at("kind");
    if (kind == "disc") return make_disc_grid(j.at("n_radial"), j.at("n_angular"));
    if (j.contains("radii")) {
        std::vector<double> radii = j.at("radii");
        return PolarGrid::make_annulus_with_radii(std::move(radii), j.at("n_angular"));
    }
    return make_annulus_grid(j.at("inner_radius"), j.at("n_radial"), j.at("n_angular"), j.at("outer_radius"));
}

}  // namespace

void write_grid_function_csv(const GridFunction& f, std::ostream& os) {
    const PolarGrid& g = f.grid();
    os << "# discfill grid-function v1 " << grid_descriptor(g).dump() << "\n";
    os << "r,theta,re,im\n";
    for (int j = 0; j < g.n_radial(); ++j) {
        for (int k = 0; k < g.n_angular(); ++k) {
            const Complex v = f.at(j, k);
            os << num(g.radius(j)) << ',' << num(g.theta(k)) << ',' << num(v.real()) << ',' << num(v.imag())
               << "\n";
        }
    }
}

GridFunction read_grid_function_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# discfill grid-function v1 ", 0) != 0)
        throw IoError("grid-function csv: bad header");
    const json desc = json::parse(line.substr(std::strlen("# discfill grid-function v1 ")));
    GridPtr grid = grid_from_descriptor(desc);
    if (!std::getline(is, line)) throw IoError("grid-function csv: missing column header");

    GridFunction f(grid);
    for (int j = 0; j < grid->n_radial(); ++j) {
        for (int k = 0; k < grid->n_angular(); ++k) {
            if (!std::getline(is, line)) throw IoError("grid-function csv: truncated");
            double r, th, re, im;
            if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg", &r, &th, &re, &im) != 4)
                throw IoError("grid-function csv: bad record '" + line + "'");
            f.at(j, k) = Complex{re, im};
        }
    }
    return f;
}

namespace {
constexpr char kMagic[8] = {'D', 'F', 'G', 'F', '0', '0', '0', '1'};
}

void write_grid_function_binary(const GridFunction& f, const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string());
    os.write(kMagic, sizeof kMagic);
    const std::string desc = grid_descriptor(f.grid()).dump();
    const std::uint64_t dlen = desc.size();
    os.write(reinterpret_cast<const char*>(&dlen), sizeof dlen);
    os.write(desc.data(), static_cast<std::streamsize>(dlen));
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.size() * sizeof(Complex)));
    if (!os) throw IoError("write failed for " + path.string());
}

GridFunction read_grid_function_binary(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError("bad magic in " + path.string());
    std::uint64_t dlen = 0;
    is.read(reinterpret_cast<char*>(&dlen), sizeof dlen);
    std::string desc(dlen, '\0');
    is.read(desc.data(), static_cast<std::streamsize>(dlen));
    GridPtr grid = grid_from_descriptor(json::parse(desc));
    GridFunction f(grid);
    is.read(reinterpret_cast<char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(Complex)));
    if (!is) throw IoError("truncated grid function in " + path.string());
    return f;
}

void write_disc_solution(const DiscSolution& s, const fs::path& stem, bool binary_payload) {
    json meta;
    meta["schema"] = "discfill disc-solution v1";
    meta["R"] = s.R;
    meta["t"] = s.t;
    meta["tau"] = s.tau;
    meta["residual_norm"] = s.residual_norm;
    meta["boundary_deviation"] = s.boundary_deviation;
    meta["normalization_error"] = s.normalization_error;
    meta["winding"] = s.winding;
    meta["min_abs_w"] = s.min_abs_w;
    meta["max_abs_w"] = s.max_abs_w;
    meta["picard_iterations"] = s.picard_iterations;
    meta["area"] = s.area;
    meta["payload"] = binary_payload ? "gf" : "csv";
    std::ofstream os(stem.string() + ".json");
    os << meta.dump(2) << "\n";
    if (binary_payload) {
        write_grid_function_binary(s.w, stem.string() + ".gf");
    } else {
        std::ofstream cs(stem.string() + ".csv");
        write_grid_function_csv(s.w, cs);
    }
}

DiscSolution read_disc_solution(const fs::path& stem) {
    std::ifstream is(stem.string() + ".json");
    if (!is) throw IoError("cannot open " + stem.string() + ".json");
    json meta = json::parse(is);
    GridFunction w = [&] {
        if (meta.at("payload") == "gf") return read_grid_function_binary(stem.string() + ".gf");
        std::ifstream cs(stem.string() + ".csv");
        if (!cs) throw IoError("cannot open " + stem.string() + ".csv");
        return read_grid_function_csv(cs);
    }();
    DiscSolution s{std::move(w),
                   meta.at("R"),
                   meta.at("t"),
                   meta.at("tau"),
                   meta.at("residual_norm"),
                   meta.at("boundary_deviation"),
                   meta.at("normalization_error"),
                   meta.at("winding"),
                   meta.at("min_abs_w"),
                   meta.at("max_abs_w"),
                   meta.at("picard_iterations")};
    s.area = meta.at("area");
    return s;
}

json level_report_to_json(const LevelReport& rep) {
    json j;
    j["t"] = rep.t;
    j["max_residual"] = rep.max_residual;
    j["max_boundary_deviation"] = rep.max_boundary_deviation;
    j["max_normalization_error"] = rep.max_normalization_error;
    j["max_abs_winding"] = rep.max_abs_winding;
    j["min_abs_w"] = rep.min_abs_w;
    j["min_same_level_distance"] = rep.min_same_level_distance;
    j["min_boundary_distance"] = rep.min_boundary_distance;
    j["min_cross_level_distance"] = rep.min_cross_level_distance;
    j["separation_threshold"] = rep.separation_threshold;
    j["cover_gap"] = rep.cover_gap;
    j["cover_threshold"] = rep.cover_threshold;
    j["max_holder"] = rep.max_holder;
    j["pass"] = rep.pass;
    return j;
}

void write_foliation_archive(const Foliation& fol, const fs::path& dir, bool binary_payload) {
    fs::create_directories(dir);
    json manifest;
    manifest["schema"] = "discfill foliation v1";
    manifest["R"] = fol.R;
    manifest["t_levels"] = fol.t_levels;
    manifest["taus"] = fol.taus;
    manifest["holder_bound_seen"] = fol.holder_bound_seen;
    manifest["all_pass"] = fol.all_pass();
    json reports = json::array();
    for (const auto& rep : fol.reports) reports.push_back(level_report_to_json(rep));
    manifest["admissibility"] = reports;

    for (int l = 0; l < fol.level_count(); ++l) {
        char lvl[32];
        std::snprintf(lvl, sizeof lvl, "level_%03d", l);
        const fs::path level_dir = dir / lvl;
        fs::create_directories(level_dir);
        for (int i = 0; i < fol.tau_count(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "disc_%03d", i);
            write_disc_solution(fol.disc(l, i), level_dir / name, binary_payload);
        }
        // Γᵗ slice for plotting: boundary traces of the level.
        std::ofstream slice(level_dir / "gamma_boundary.csv");
        slice << "tau,theta,re_z,im_z,re_w,im_w\n";
        const PolarGrid& g = fol.disc(l, 0).w.grid();
        for (int i = 0; i < fol.tau_count(); ++i) {
            const auto trace = fol.disc(l, i).w.boundary_trace();
            for (int k = 0; k < g.n_angular(); ++k) {
                const Complex z = fol.R * std::polar(1.0, g.theta(k));
                const Complex w = trace[static_cast<std::size_t>(k)];
                slice << num(fol.taus[static_cast<std::size_t>(i)]) << ',' << num(g.theta(k)) << ','
                      << num(z.real()) << ',' << num(z.imag()) << ',' << num(w.real()) << ',' << num(w.imag())
                      << "\n";
            }
        }
    }
    std::ofstream os(dir / "foliation.json");
    os << manifest.dump(2) << "\n";
}

void write_history_csv(std::span<const double> values, const std::string& name, std::ostream& os) {
    os << "iteration," << name << "\n";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i + 1) << ',' << num(values[i]) << "\n";
}

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot hash " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof buf);
        const std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
    fs::create_directories(dir);
    json j;
    j["schema"] = "discfill run-manifest v1";
    j["artifact_version"] = m.artifact_version;
    j["status"] = m.status;
    j["wall_seconds"] = m.wall_seconds;
    j["config"] = m.config_echo;
    json stages = json::array();
    for (const auto& [name, state] : m.stages) stages.push_back({{"stage", name}, {"status", state}});
    j["stages"] = stages;
    if (!m.extra.is_null()) j["results"] = m.extra;

    json files = json::array();
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "manifest.json") continue;
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016" PRIx64, fnv1a_file(entry.path()));
        files.push_back({{"path", fs::relative(entry.path(), dir).string()},
                         {"bytes", entry.file_size()},
                         {"fnv1a", hash}});
    }
    std::sort(files.begin(), files.end(),
              [](const json& a, const json& b) { return a.at("path") < b.at("path"); });
    j["files"] = files;

    std::ofstream os(dir / "manifest.json");
    os << j.dump(2) << "\n";
}

}  // namespace discfill
