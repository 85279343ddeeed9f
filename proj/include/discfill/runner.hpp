#pragma once

#include <filesystem>

#include "json.hpp"

#include "discfill/io.hpp"
#include "discfill/nonsqueezing.hpp"
#include "discfill/presets.hpp"

namespace discfill {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exit codes shared by every command.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 2,
    kExitSolverFailure = 3,
    kExitCertificateIncomplete = 4,
};

/// A fully parsed run: the command, the structure preset, grids, solver
/// parameters, the seed, and the raw config echoed into manifests.
struct RunConfig {
    std::string command;
    nlohmann::json raw;
    std::uint64_t seed = 1;
    int grid_radial = 64;
    int grid_angular = 256;
    int threads = 1;
    bool binary_payload = true;

    nlohmann::json structure;  // {"preset": ..., parameters...}
    nlohmann::json params;     // command-specific block

    static RunConfig parse(const nlohmann::json& document);
};

/// Structure presets available to configs: standard, bump, bump-rotsym,
/// bump-weighted, shear-pushforward, hartogs.
TriangularStructure make_structure(const nlohmann::json& spec);

/// Commands; each writes its outputs plus a manifest.json under out_dir
/// (also on failure) and returns an exit code.
int cmd_solve_disc(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_foliate(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_squeeze(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Dispatch on cfg.command.
int run_command(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace discfill
