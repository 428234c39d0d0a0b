#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eit/fit.hpp"
#include "eit/output.hpp"
#include "eit/spectrum.hpp"

namespace eit {

/// Probe-detuning grid request. min/max stay in the authored unit
/// (Gamma2 | MHz | rad_s) and are resolved when the grid is built.
struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    int n = 0;
    std::string unit = "Gamma2";
};

/// Velocity grid for the dressed-eigenvalue trace [m/s].
struct TraceSpec {
    double v_min = 0.0;
    double v_max = 0.0;
    int n = 0;
};

struct SweepSpec {
    std::vector<double> ratios;  // k_c/k_p, ascending
};

/// A fully described computation: one base transition (optionally expanded
/// to a multi-line stack through a constants file), the field and vapor
/// conditions, the quadrature choice, and the requested outputs. All
/// frequency-like inputs are resolved to rad/s at parse time.
struct Scenario {
    std::string name;
    std::vector<Geometry> geometries;
    LadderScheme base;
    std::string constants_file;  // empty: single-line model
    std::map<std::string, double> gamma_extra_per_isotope;
    FieldConfig fields;  // geometry field is overridden per run
    VaporEnsemble vapor;
    QuadratureSpec quad;
    GridSpec grid;
    std::vector<std::string> outputs;
    std::optional<TraceSpec> trace;
    std::optional<SweepSpec> sweep;
    std::vector<FitParameter> fit_params;
    std::uint64_t seed = 0;

    void validate() const;
    std::vector<double> build_grid() const;  // resolved to rad/s
};

bool operator==(const GridSpec&, const GridSpec&);
bool operator==(const TraceSpec&, const TraceSpec&);
bool operator==(const SweepSpec&, const SweepSpec&);
bool operator==(const Scenario&, const Scenario&);

/// Parse scenario JSON. `origin` names the source in diagnostics and
/// resolves relative constants_file paths (pass the file path, or a label
/// like "<memory>" for in-memory text).
Scenario scenario_from_text(const std::string& text,
                            const std::string& origin);

/// Read & parse a scenario file. The EITSIM_CONSTANTS environment
/// variable, when set, replaces the constants_file path. A scenario
/// without an explicit name is named after the file stem.
Scenario load_scenario(const std::string& path);

/// Serialize so that scenario_from_text(scenario_to_text(s)) == s.
std::string scenario_to_text(const Scenario& scenario);

struct RunOptions {
    std::string out_dir = ".";
    OutputFormat format = OutputFormat::Csv;
    int threads = 0;  // 0 keeps the current global setting
    std::optional<std::uint64_t> seed;
    bool sweep_only = false;  // restrict to the sweep output
};

/// Execute the scenario's requested outputs and write them plus a
/// manifest under options.out_dir. Returns the list of files written.
std::vector<std::string> run_scenario(const Scenario& scenario,
                                      const RunOptions& options);

/// Fit the scenario's model to a measured spectrum (fit_params must be
/// nonempty); writes the fit report and manifest, returns the result.
FitResult run_fit(const Scenario& scenario, const std::string& data_path,
                  const RunOptions& options);

}  // namespace eit
