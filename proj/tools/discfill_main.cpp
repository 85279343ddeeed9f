#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "discfill/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"discfill — pseudoholomorphic disc filling and symplectic non-squeezing experiments"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<int> resolution;
    double tol = -1.0;
    int threads = 0;

    app.add_option("--config", config_path, "Path to a JSON run configuration")->required();
    app.add_option("--out", out_dir, "Output directory (default: out)");
    app.add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--resolution", resolution, "Override grid resolution: NR NA")->expected(2);
    app.add_option("--tol", tol, "Override the attach residual cap");
    app.add_option("--threads", threads, "Worker threads for τ-sweeps (0 = config value)");

    // Subcommands override the config's command field.
    std::string command_override;
    for (const char* name : {"solve-disc", "foliate", "squeeze", "verify"}) {
        app.add_subcommand(name, "")->callback([&command_override, name] { command_override = name; });
    }

    CLI11_PARSE(app, argc, argv);

    nlohmann::json document;
    try {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return discfill::kExitConfigError;
        }
        document = nlohmann::json::parse(is);
    } catch (const std::exception& e) {
        std::cerr << "error: config parse failure: " << e.what() << "\n";
        return discfill::kExitConfigError;
    }

    if (!command_override.empty()) document["command"] = command_override;
    if (seed_set) document["seed"] = seed;
    if (!resolution.empty()) {
        document["grid"]["radial"] = resolution[0];
        document["grid"]["angular"] = resolution[1];
    }
    if (tol > 0.0) document["continuation"]["residual_cap"] = tol;
    if (threads > 0) document["threads"] = threads;

    try {
        discfill::RunConfig cfg = discfill::RunConfig::parse(document);
        return discfill::run_command(cfg, out_dir);
    } catch (const discfill::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return discfill::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return discfill::kExitSolverFailure;
    }
}
