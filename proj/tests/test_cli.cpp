#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "eit/cli.hpp"
#include "eit/fit.hpp"
#include "eit/scenario.hpp"
#include "support/common.hpp"

using namespace eit;

namespace {

namespace fs = std::filesystem;

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "eitsim");
    std::vector<char*> argv;
    argv.reserve(args.size());
    for (std::string& a : args) argv.push_back(a.data());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("eit_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

// Scenario JSON for a quick single-line run: heavily broadened so the
// default velocity integration converges immediately.
std::string quick_scenario_text(const std::string& extra = "") {
    return R"({
      "geometry": "counter",
      "scheme": {
        "lambda_p_nm": 780.24,
        "lambda_c_nm": 488.08,
        "gamma2": {"value": 6.07, "unit": "MHz"},
        "gamma3": {"value": 8.0, "unit": "Gamma2"},
        "gamma_extra": {"value": 20.0, "unit": "Gamma2"}
      },
      "fields": {
        "delta_c": {"value": 0, "unit": "Gamma2"},
        "omega_c": {"value": 2.0, "unit": "Gamma2"}
      },
      "vapor": {
        "temperature_K": 320,
        "mass_u": 86.909180531,
        "density_per_m3": 1.2e16,
        "length_m": 0.05
      },
      "grid": {"min": -10, "max": 10, "n": 16, "unit": "Gamma2"},
      "outputs": ["spectrum"])" +
           extra + "\n}";
}

std::string write_scenario(const fs::path& dir, const std::string& name,
                           const std::string& text) {
    const fs::path path = dir / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

}  // namespace

TEST_CASE("validate verb") {
    SUBCASE("bundled scenarios pass, constants file included") {
        CHECK(run_cli({"validate", EIT_SOURCE_DIR "/scenarios/fig3.json"}) ==
              0);
        CHECK(run_cli({"validate", EIT_SOURCE_DIR "/scenarios/fig6.json"}) ==
              0);
    }

    SUBCASE("missing scenario file maps to the filesystem exit code") {
        CHECK(run_cli({"validate", "/nonexistent/scenario.json"}) == 4);
    }

    SUBCASE("malformed scenario maps to the configuration exit code") {
        const fs::path dir = fresh_dir("badjson");
        const std::string path =
            write_scenario(dir, "broken.json", "{ this is not json");
        CHECK(run_cli({"validate", path}) == 2);
    }

    SUBCASE("semantically invalid scenario also exits 2") {
        const fs::path dir = fresh_dir("badgrid");
        auto j = nlohmann::json::parse(quick_scenario_text());
        j["grid"]["n"] = 4;  // below the minimum
        const std::string path =
            write_scenario(dir, "toofew.json", j.dump());
        CHECK(run_cli({"validate", path}) == 2);
    }
}

TEST_CASE("run verb writes the requested outputs") {
    const fs::path dir = fresh_dir("run");
    const std::string scenario =
        write_scenario(dir, "quick.json", quick_scenario_text());
    const fs::path out = dir / "out";

    CHECK(run_cli({"run", scenario, "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "quick_counter_spectrum.csv"));
    CHECK(fs::exists(out / "manifest.json"));

    SUBCASE("json format switches the file type") {
        const fs::path out2 = dir / "out_json";
        CHECK(run_cli({"run", scenario, "--out", out2.string(), "--format",
                       "json"}) == 0);
        CHECK(fs::exists(out2 / "quick_counter_spectrum.json"));
        const auto spectrum = nlohmann::json::parse(
            slurp(out2 / "quick_counter_spectrum.json"));
        CHECK(spectrum["rows"].size() == 16);
    }

    SUBCASE("an explicit seed lands in the manifest") {
        const fs::path out3 = dir / "out_seeded";
        CHECK(run_cli({"run", scenario, "--out", out3.string(), "--seed",
                       "7"}) == 0);
        const auto manifest =
            nlohmann::json::parse(slurp(out3 / "manifest.json"));
        CHECK(manifest["seed"] == 7);
    }

    SUBCASE("unwritable output directory exits 4") {
        CHECK(run_cli({"run", scenario, "--out",
                       "/proc/no_such_place/out"}) == 4);
    }
}

TEST_CASE("sweep verb computes only the ratio sweep") {
    const fs::path dir = fresh_dir("sweep");
    const std::string with_sweep = write_scenario(
        dir, "sw.json",
        R"({
          "geometry": "counter",
          "scheme": {
            "lambda_p_nm": 780.24,
            "lambda_c_nm": 488.08,
            "gamma2": {"value": 6.07, "unit": "MHz"},
            "gamma3": {"value": 0.0265, "unit": "MHz"}
          },
          "fields": {
            "delta_c": {"value": 0, "unit": "Gamma2"},
            "omega_c": {"value": 1.5, "unit": "Gamma2"}
          },
          "vapor": {
            "temperature_K": 320,
            "mass_u": 86.909180531,
            "density_per_m3": 1.2e16,
            "length_m": 0.05
          },
          "quadrature": {"rule": "adaptive", "node_count": 24,
                         "rel_tol": 1e-6},
          "grid": {"min": -30, "max": 30, "n": 64, "unit": "Gamma2"},
          "outputs": ["spectrum", "sweep"],
          "sweep": {"ratios": [1.6]}
        })");

    const fs::path out = dir / "out";
    CHECK(run_cli({"sweep", with_sweep, "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "sw_counter_sweep.csv"));
    // spectrum was requested by the scenario but suppressed by the verb
    CHECK_FALSE(fs::exists(out / "sw_counter_spectrum.csv"));

    SUBCASE("a scenario without a sweep block exits 2") {
        const std::string no_sweep =
            write_scenario(dir, "nosweep.json", quick_scenario_text());
        CHECK(run_cli({"sweep", no_sweep, "--out",
                       (dir / "out2").string()}) == 2);
    }
}

TEST_CASE("fit verb fits measured data") {
    const fs::path dir = fresh_dir("fit");
    const std::string scenario = write_scenario(
        dir, "fitme.json",
        quick_scenario_text(
            R"(, "fit": [{"name": "amplitude", "lower": 0.1,
                          "upper": 2.0, "initial": 1.0}])"));

    // synthesize data at amplitude 0.8 with the library itself
    const Scenario s = load_scenario(scenario);
    FitProblem problem;
    problem.stack.lines.push_back(StackLine{s.base, 1.0, 0.0, ""});
    problem.fields = s.fields;
    problem.fields.geometry = Geometry::Counter;
    problem.vapor = s.vapor;
    problem.quad = s.quad;
    problem.free_params = s.fit_params;

    const std::vector<double> grid = s.build_grid();
    const std::vector<double> truth = {0.8};
    const std::vector<double> model =
        model_transmission(problem, truth, grid);

    const fs::path data = dir / "bench.csv";
    {
        std::ofstream outf(data);
        outf << "# direction: counter\ndelta_p_MHz,transmission\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            char buf[80];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n",
                          grid[i] / (constants::two_pi * 1e6), model[i]);
            outf << buf;
        }
    }

    const fs::path out = dir / "out";
    CHECK(run_cli({"fit", scenario, data.string(), "--out",
                   out.string()}) == 0);
    CHECK(fs::exists(out / "fitme_fit.txt"));
    const std::string report = slurp(out / "fitme_fit.txt");
    CHECK(report.find("param amplitude = 0.8") != std::string::npos);

    SUBCASE("missing data file exits 4") {
        CHECK(run_cli({"fit", scenario, (dir / "absent.csv").string(),
                       "--out", out.string()}) == 4);
    }
}

TEST_CASE("numerical failures surface as exit code 3") {
    const fs::path dir = fresh_dir("numfail");
    // the bare rubidium line is far too narrow for a capped fixed-order
    // Gauss-Hermite rule
    auto j = nlohmann::json::parse(quick_scenario_text());
    j["scheme"].erase("gamma_extra");
    j["scheme"]["gamma3"] = {{"value", 0.0265}, {"unit", "MHz"}};
    j["quadrature"] = {{"rule", "gauss_hermite"},
                       {"node_count", 64},
                       {"max_nodes", 128}};
    const std::string path = write_scenario(dir, "narrow.json", j.dump());
    CHECK(run_cli({"run", path, "--out", (dir / "out").string()}) == 3);
}

TEST_CASE("command-line misuse is rejected") {
    CHECK(run_cli({"frobnicate", "x.json"}) != 0);
    CHECK(run_cli({"run"}) != 0);                 // missing scenario
    CHECK(run_cli({}) != 0);                      // no verb at all
    const fs::path dir = fresh_dir("misuse");
    const std::string scenario =
        write_scenario(dir, "ok.json", quick_scenario_text());
    CHECK(run_cli({"run", scenario, "--format", "xml"}) != 0);
}
