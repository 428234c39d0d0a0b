#include "eit/cli.hpp"

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eit/hyperfine.hpp"
#include "eit/scenario.hpp"

namespace eit {

namespace {

struct CommonFlags {
    std::string out_dir = ".";
    std::string format = "csv";
    int threads = 0;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
    cmd->add_option("--out", flags->out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--threads", flags->threads,
                    "worker thread cap (0 = hardware default)")
        ->capture_default_str();
    cmd->add_option("--seed", flags->seed, "override the scenario seed");
    cmd->add_option("--format", flags->format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

RunOptions to_options(const CommonFlags& flags) {
    RunOptions options;
    options.out_dir = flags.out_dir;
    options.format = flags.format == "json" ? OutputFormat::Json
                                            : OutputFormat::Csv;
    options.threads = flags.threads;
    options.seed = flags.seed;
    return options;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"three-level ladder EIT spectra in hot vapor"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string data_path;
    CommonFlags flags;

    CLI::App* run = app.add_subcommand(
        "run", "compute a scenario's requested outputs");
    run->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();
    add_common(run, &flags);

    CLI::App* sweep = app.add_subcommand(
        "sweep", "compute only the wavenumber-ratio sweep");
    sweep->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();
    add_common(sweep, &flags);

    CLI::App* fit_cmd = app.add_subcommand(
        "fit", "fit the scenario's model to measured data");
    fit_cmd->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();
    fit_cmd->add_option("data", data_path, "measured spectrum (csv/tsv)")
        ->required();
    add_common(fit_cmd, &flags);

    CLI::App* validate = app.add_subcommand(
        "validate", "parse and validate a scenario file");
    validate->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (validate->parsed()) {
            const Scenario scenario = load_scenario(scenario_path);
            scenario.validate();
            if (!scenario.constants_file.empty()) {
                load_hyperfine_table(scenario.constants_file);
            }
            std::printf("ok: %s\n", scenario.name.c_str());
            return 0;
        }

        const Scenario scenario = load_scenario(scenario_path);
        RunOptions options = to_options(flags);

        if (fit_cmd->parsed()) {
            const FitResult result =
                run_fit(scenario, data_path, options);
            std::printf("fit %s: rms %.6g after %d iterations (%s)\n",
                        scenario.name.c_str(), result.rms,
                        result.iterations,
                        result.converged ? "converged" : "not converged");
            return 0;
        }

        options.sweep_only = sweep->parsed();
        const std::vector<std::string> files =
            run_scenario(scenario, options);
        for (const std::string& f : files) {
            std::printf("wrote %s\n", f.c_str());
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace eit
