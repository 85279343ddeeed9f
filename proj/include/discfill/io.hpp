#pragma once

#include <filesystem>
#include <iosfwd>

#include "json.hpp"

#include "discfill/continuation.hpp"

namespace discfill {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Text form: one `r,theta,re,im` record per node, angular-major (the
/// angular index varies fastest), preceded by a header describing the grid.
void write_grid_function_csv(const GridFunction& f, std::ostream& os);
GridFunction read_grid_function_csv(std::istream& is);

/// Flat binary form: magic, grid descriptor, radii, then interleaved
/// re/im doubles in the same angular-major order.
void write_grid_function_binary(const GridFunction& f, const std::filesystem::path& path);
GridFunction read_grid_function_binary(const std::filesystem::path& path);

/// Disc solution: a JSON metadata header (t, τ, residual, winding, area,
/// …) next to the grid-function payload.
void write_disc_solution(const DiscSolution& s, const std::filesystem::path& stem, bool binary_payload = true);
DiscSolution read_disc_solution(const std::filesystem::path& stem);

nlohmann::json level_report_to_json(const LevelReport& rep);

/// Foliation archive: directory with manifest.json, per-level disc files,
/// and plot-ready CSV slices of the Γᵗ point clouds.
void write_foliation_archive(const Foliation& fol, const std::filesystem::path& dir, bool binary_payload = true);

/// Convergence-history dump: `iteration,<name>` records.
void write_history_csv(std::span<const double> values, const std::string& name, std::ostream& os);

/// FNV-1a content hash, used for the manifest file inventory.
std::uint64_t fnv1a_file(const std::filesystem::path& path);

struct RunManifest {
    nlohmann::json config_echo;
    std::string artifact_version = "discfill 0.1.0";
    std::string status = "incomplete";
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> stages;  // (name, status)
    nlohmann::json extra;

    void add_stage(const std::string& name, const std::string& state) { stages.emplace_back(name, state); }
};

/// Writes manifest.json in dir, inventorying every regular file below it
/// (path, size, checksum).
void write_manifest(const RunManifest& m, const std::filesystem::path& dir);

}  // namespace discfill
