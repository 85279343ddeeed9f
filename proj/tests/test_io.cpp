#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "discfill/io.hpp"
#include "discfill/presets.hpp"
#include "discfill/runner.hpp"

using namespace discfill;
namespace fs = std::filesystem;

TEST_CASE("grid function csv round trip") {
    auto g = make_disc_grid(12, 32);
    auto f = GridFunction::sample(g, [](Complex z) { return std::exp(z) + std::conj(z); });
    std::stringstream ss;
    write_grid_function_csv(f, ss);
    auto back = read_grid_function_csv(ss);
    REQUIRE(back.size() == f.size());
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(f.values()[i] - back.values()[i]));
    CHECK(err < 1e-15);
    // Angular-major ordering: the second record is the next angular node.
    std::stringstream ss2;
    write_grid_function_csv(f, ss2);
    std::string line;
    std::getline(ss2, line);
    std::getline(ss2, line);
    std::getline(ss2, line);  // first record: (r0, θ0)
    double r0 = 0, th0 = 0;
    std::sscanf(line.c_str(), "%lg,%lg", &r0, &th0);
    std::getline(ss2, line);  // second record: (r0, θ1)
    double r1 = 0, th1 = 0;
    std::sscanf(line.c_str(), "%lg,%lg", &r1, &th1);
    CHECK(r0 == doctest::Approx(r1));
    CHECK(th1 > th0);
}

TEST_CASE("grid function binary and disc solution round trip") {
    const fs::path dir = fs::temp_directory_path() / "discfill_io_test";
    fs::create_directories(dir);
    auto g = make_annulus_grid(0.6, 12, 32);
    auto f = GridFunction::sample(g, [](Complex z) { return z * z + 0.3 / z; });
    write_grid_function_binary(f, dir / "f.gf");
    auto back = read_grid_function_binary(dir / "f.gf");
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.values()[i] == back.values()[i]);

    auto disc_grid = make_disc_grid(16, 64);
    auto sol = attach_disc(presets::flat(), {1.0, 0.4}, 0.9, disc_grid);
    sol.area = 3.14159;
    write_disc_solution(sol, dir / "disc");
    auto sol_back = read_disc_solution(dir / "disc");
    CHECK(sol_back.t == doctest::Approx(0.4));
    CHECK(sol_back.tau == doctest::Approx(0.9));
    CHECK(sol_back.area == doctest::Approx(3.14159));
    for (std::size_t i = 0; i < sol.w.size(); ++i) CHECK(sol.w.values()[i] == sol_back.w.values()[i]);
    fs::remove_all(dir);
}

TEST_CASE("config parsing and validation") {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["command"] = "solve-disc";
    doc["seed"] = 42;
    doc["grid"] = {{"radial", 24}, {"angular", 64}};
    auto cfg = RunConfig::parse(doc);
    CHECK(cfg.command == "solve-disc");
    CHECK(cfg.seed == 42);
    CHECK(cfg.grid_radial == 24);

    nlohmann::json bad = doc;
    bad["grid"]["angular"] = 100;  // not a power of two
    CHECK_THROWS_AS(RunConfig::parse(bad), ConfigError);

    nlohmann::json no_cmd;
    no_cmd["schema_version"] = 1;
    CHECK_THROWS_AS(RunConfig::parse(no_cmd), ConfigError);

    CHECK_THROWS_AS(make_structure({{"preset", "unknown"}}), ConfigError);
}

TEST_CASE("structure presets from configs") {
    auto flat = make_structure({{"preset", "standard"}});
    CHECK(std::abs(flat.a({0.3, 0.1}, {0.2, 0.0})) == 0.0);

    auto bump = make_structure({{"preset", "bump"}, {"amplitude", 0.2}});
    CHECK(std::abs(bump.a({0.1, 0.0}, {0.5, 0.0})) > 0.0);

    auto shear = make_structure({{"preset", "shear-pushforward"}, {"strength", 0.15}});
    // Triangular with b = 0 and |a| bounded away from 1.
    CHECK(std::abs(shear.b({0.3, 0.2}, {0.1, 0.0})) < 1e-12);
    CHECK(std::abs(shear.a({0.3, 0.2}, {0.1, 0.0})) < 0.5);

    auto hart = make_structure({{"preset", "hartogs"}});
    CHECK(std::abs(hart.a({0.5, 0.0}, {0.1, 0.0})) == 0.0);
}
