#include "eit/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "eit/constants.hpp"
#include "eit/hyperfine.hpp"
#include "eit/parallel.hpp"
#include "eit/susceptibility.hpp"

namespace eit {

namespace {

using nlohmann::json;

const char* const kOutputKinds[] = {"spectrum", "eigen_trace", "window",
                                    "sweep", "fit"};

void check_keys(const json& j,
                std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            known = known || it.key() == key;
        }
        if (!known) {
            throw ConfigError(context + ": unknown key '" + it.key() + "'");
        }
    }
}

const json& require(const json& j, const char* key,
                    const std::string& context) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(context + ": missing key '" + std::string(key) +
                          "'");
    }
    return *it;
}

double as_double(const json& j, const std::string& context) {
    if (!j.is_number()) {
        throw ConfigError(context + ": expected a number");
    }
    return j.get<double>();
}

int as_int(const json& j, const std::string& context) {
    if (!j.is_number_integer()) {
        throw ConfigError(context + ": expected an integer");
    }
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& context) {
    if (!j.is_string()) {
        throw ConfigError(context + ": expected a string");
    }
    return j.get<std::string>();
}

// A frequency-like quantity: a bare number is rad/s; an object carries an
// explicit unit. gamma2_ref < 0 marks contexts where Gamma2 units would be
// self-referential.
double parse_quantity(const json& j, double gamma2_ref,
                      const std::string& context) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (!j.is_object()) {
        throw ConfigError(context +
                          ": expected a number or {value, unit}");
    }
    check_keys(j, {"value", "unit"}, context);
    const double value =
        as_double(require(j, "value", context), context + ".value");
    const std::string unit =
        as_string(require(j, "unit", context), context + ".unit");
    if (unit == "rad_s") {
        return value;
    }
    if (unit == "MHz") {
        return value * constants::two_pi * 1e6;
    }
    if (unit == "Gamma2") {
        if (gamma2_ref < 0.0) {
            throw ConfigError(context +
                              ": Gamma2 units are not allowed here");
        }
        return value * gamma2_ref;
    }
    throw ConfigError(context + ": unknown unit '" + unit +
                      "' (want rad_s, MHz or Gamma2)");
}

Geometry parse_geometry(const json& j, const std::string& context) {
    const std::string g = as_string(j, context);
    if (g == "counter") {
        return Geometry::Counter;
    }
    if (g == "co") {
        return Geometry::Co;
    }
    throw ConfigError(context + ": geometry must be 'counter' or 'co', "
                              "got '" +
                      g + "'");
}

double unit_factor(const std::string& unit, double gamma2_ref,
                   const std::string& context) {
    if (unit == "rad_s") {
        return 1.0;
    }
    if (unit == "MHz") {
        return constants::two_pi * 1e6;
    }
    if (unit == "Gamma2") {
        return gamma2_ref;
    }
    throw ConfigError(context + ": unknown unit '" + unit +
                      "' (want rad_s, MHz or Gamma2)");
}

bool has_output(const Scenario& s, const char* kind) {
    return std::find(s.outputs.begin(), s.outputs.end(), kind) !=
           s.outputs.end();
}

LineStack build_scenario_stack(const Scenario& scenario) {
    if (scenario.constants_file.empty()) {
        return LineStack{{StackLine{scenario.base, 1.0, 0.0, ""}}};
    }
    const HyperfineTable table =
        load_hyperfine_table(scenario.constants_file);
    return build_stack(table, scenario.base,
                       scenario.gamma_extra_per_isotope);
}

std::string file_extension(OutputFormat format) {
    return format == OutputFormat::Json ? ".json" : ".csv";
}

}  // namespace

bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.min == b.min && a.max == b.max && a.n == b.n &&
           a.unit == b.unit;
}

bool operator==(const TraceSpec& a, const TraceSpec& b) {
    return a.v_min == b.v_min && a.v_max == b.v_max && a.n == b.n;
}

bool operator==(const SweepSpec& a, const SweepSpec& b) {
    return a.ratios == b.ratios;
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.geometries == b.geometries &&
           a.base == b.base && a.constants_file == b.constants_file &&
           a.gamma_extra_per_isotope == b.gamma_extra_per_isotope &&
           a.fields == b.fields && a.vapor == b.vapor &&
           a.quad == b.quad && a.grid == b.grid &&
           a.outputs == b.outputs && a.trace == b.trace &&
           a.sweep == b.sweep && a.fit_params == b.fit_params &&
           a.seed == b.seed;
}

void Scenario::validate() const {
    if (name.empty()) {
        throw ConfigError("scenario name must not be empty");
    }
    if (geometries.empty()) {
        throw ConfigError("scenario needs at least one geometry");
    }
    for (std::size_t i = 0; i < geometries.size(); ++i) {
        for (std::size_t j = i + 1; j < geometries.size(); ++j) {
            if (geometries[i] == geometries[j]) {
                throw ConfigError("duplicate geometry entry");
            }
        }
    }
    base.validate();
    fields.validate();
    vapor.validate();
    quad.validate();

    if (!(std::isfinite(grid.min) && std::isfinite(grid.max) &&
          grid.min < grid.max)) {
        throw ConfigError("grid.min must be < grid.max and finite");
    }
    if (grid.n < 16) {
        throw ConfigError("grid.n must be >= 16");
    }
    if (grid.unit != "Gamma2" && grid.unit != "MHz" &&
        grid.unit != "rad_s") {
        throw ConfigError("grid.unit must be Gamma2, MHz or rad_s");
    }

    if (outputs.empty()) {
        throw ConfigError("outputs must not be empty");
    }
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        bool known = false;
        for (const char* kind : kOutputKinds) {
            known = known || outputs[i] == kind;
        }
        if (!known) {
            throw ConfigError("unknown output kind '" + outputs[i] + "'");
        }
        for (std::size_t j = i + 1; j < outputs.size(); ++j) {
            if (outputs[i] == outputs[j]) {
                throw ConfigError("duplicate output kind '" + outputs[i] +
                                  "'");
            }
        }
    }

    if (has_output(*this, "eigen_trace")) {
        if (!trace) {
            throw ConfigError("eigen_trace output needs a trace block");
        }
        if (!(std::isfinite(trace->v_min) && std::isfinite(trace->v_max) &&
              trace->v_min < trace->v_max)) {
            throw ConfigError("trace.v_min must be < trace.v_max");
        }
        if (trace->n < 2) {
            throw ConfigError("trace.n must be >= 2");
        }
    }
    if (has_output(*this, "sweep")) {
        if (!sweep || sweep->ratios.empty()) {
            throw ConfigError("sweep output needs sweep.ratios");
        }
        for (std::size_t i = 0; i < sweep->ratios.size(); ++i) {
            if (!std::isfinite(sweep->ratios[i]) ||
                sweep->ratios[i] <= 0.0) {
                throw ConfigError("sweep ratios must be finite and > 0");
            }
            if (i > 0 && sweep->ratios[i] < sweep->ratios[i - 1]) {
                throw ConfigError("sweep ratios must be sorted ascending");
            }
        }
    }
    if (has_output(*this, "fit") && fit_params.empty()) {
        throw ConfigError("fit output needs a fit block");
    }
    for (const FitParameter& p : fit_params) {
        if (p.name.empty()) {
            throw ConfigError("fit parameter name must not be empty");
        }
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) ||
            !(p.lower < p.upper)) {
            throw ConfigError("fit parameter '" + p.name +
                              "' needs finite bounds with lower < upper");
        }
        if (!std::isfinite(p.initial) || p.initial < p.lower ||
            p.initial > p.upper) {
            throw ConfigError("fit parameter '" + p.name +
                              "' initial value outside bounds");
        }
    }
    if (!gamma_extra_per_isotope.empty() && constants_file.empty()) {
        throw ConfigError(
            "gamma_extra_per_isotope requires a constants_file");
    }
}

std::vector<double> Scenario::build_grid() const {
    const double factor = unit_factor(grid.unit, base.gamma2, "grid.unit");
    std::vector<double> out(static_cast<std::size_t>(grid.n));
    for (int i = 0; i < grid.n; ++i) {
        const double t =
            static_cast<double>(i) / static_cast<double>(grid.n - 1);
        out[static_cast<std::size_t>(i)] =
            (grid.min + (grid.max - grid.min) * t) * factor;
    }
    return out;
}

Scenario scenario_from_text(const std::string& text,
                            const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError(origin + ": scenario must be a JSON object");
    }
    check_keys(j,
               {"name", "geometry", "scheme", "constants_file",
                "gamma_extra_per_isotope", "fields", "vapor", "quadrature",
                "grid", "outputs", "trace", "sweep", "fit", "seed"},
               origin);

    Scenario s;
    if (j.contains("name")) {
        s.name = as_string(j["name"], origin + ".name");
    }

    const json& jg = require(j, "geometry", origin);
    if (jg.is_array()) {
        for (std::size_t i = 0; i < jg.size(); ++i) {
            s.geometries.push_back(parse_geometry(
                jg[i], origin + ".geometry[" + std::to_string(i) + "]"));
        }
    } else {
        s.geometries.push_back(parse_geometry(jg, origin + ".geometry"));
    }

    {
        const json& js = require(j, "scheme", origin);
        const std::string ctx = origin + ".scheme";
        if (!js.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(js,
                   {"lambda_p_nm", "lambda_p_m", "lambda_c_nm",
                    "lambda_c_m", "gamma2", "gamma3", "gamma_extra"},
                   ctx);
        auto wavelength = [&](const char* nm_key, const char* m_key,
                              const char* what) {
            const bool has_nm = js.contains(nm_key);
            const bool has_m = js.contains(m_key);
            if (has_nm == has_m) {
                throw ConfigError(ctx + ": give exactly one of " +
                                  std::string(nm_key) + " / " + m_key +
                                  " for the " + what + " wavelength");
            }
            if (has_nm) {
                return as_double(js[nm_key], ctx + "." + nm_key) * 1e-9;
            }
            return as_double(js[m_key], ctx + "." + m_key);
        };
        s.base.lambda_p = wavelength("lambda_p_nm", "lambda_p_m", "probe");
        s.base.lambda_c =
            wavelength("lambda_c_nm", "lambda_c_m", "control");
        s.base.gamma2 =
            parse_quantity(require(js, "gamma2", ctx), -1.0,
                           ctx + ".gamma2");
        s.base.gamma3 = parse_quantity(require(js, "gamma3", ctx),
                                       s.base.gamma2, ctx + ".gamma3");
        if (js.contains("gamma_extra")) {
            s.base.gamma_extra = parse_quantity(
                js["gamma_extra"], s.base.gamma2, ctx + ".gamma_extra");
        }
    }

    if (j.contains("constants_file")) {
        s.constants_file =
            as_string(j["constants_file"], origin + ".constants_file");
    }
    if (j.contains("gamma_extra_per_isotope")) {
        const json& jm = j["gamma_extra_per_isotope"];
        const std::string ctx = origin + ".gamma_extra_per_isotope";
        if (!jm.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        for (auto it = jm.begin(); it != jm.end(); ++it) {
            s.gamma_extra_per_isotope[it.key()] = parse_quantity(
                it.value(), s.base.gamma2, ctx + "." + it.key());
        }
    }

    {
        const json& jf = require(j, "fields", origin);
        const std::string ctx = origin + ".fields";
        if (!jf.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(jf, {"delta_c", "omega_c"}, ctx);
        s.fields.delta_c = parse_quantity(require(jf, "delta_c", ctx),
                                          s.base.gamma2, ctx + ".delta_c");
        s.fields.omega_c = parse_quantity(require(jf, "omega_c", ctx),
                                          s.base.gamma2, ctx + ".omega_c");
    }

    {
        const json& jv = require(j, "vapor", origin);
        const std::string ctx = origin + ".vapor";
        if (!jv.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(jv,
                   {"temperature_K", "mass_u", "mass_kg", "density_per_m3",
                    "length_m"},
                   ctx);
        s.vapor.temperature = as_double(
            require(jv, "temperature_K", ctx), ctx + ".temperature_K");
        const bool has_u = jv.contains("mass_u");
        const bool has_kg = jv.contains("mass_kg");
        if (has_u == has_kg) {
            throw ConfigError(ctx +
                              ": give exactly one of mass_u / mass_kg");
        }
        s.vapor.mass = has_u ? as_double(jv["mass_u"], ctx + ".mass_u") *
                                   constants::atomic_mass_unit
                             : as_double(jv["mass_kg"], ctx + ".mass_kg");
        s.vapor.density = as_double(require(jv, "density_per_m3", ctx),
                                    ctx + ".density_per_m3");
        s.vapor.length =
            as_double(require(jv, "length_m", ctx), ctx + ".length_m");
    }

    if (j.contains("quadrature")) {
        const json& jq = j["quadrature"];
        const std::string ctx = origin + ".quadrature";
        if (!jq.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(jq,
                   {"rule", "node_count", "rel_tol", "velocity_cutoff",
                    "max_nodes"},
                   ctx);
        if (jq.contains("rule")) {
            const std::string rule = as_string(jq["rule"], ctx + ".rule");
            if (rule == "gauss_hermite") {
                s.quad.rule = QuadratureSpec::Rule::GaussHermite;
            } else if (rule == "adaptive") {
                s.quad.rule = QuadratureSpec::Rule::AdaptiveTrapezoid;
            } else {
                throw ConfigError(ctx + ".rule: want 'gauss_hermite' or "
                                        "'adaptive', got '" +
                                  rule + "'");
            }
        }
        if (jq.contains("node_count")) {
            s.quad.node_count =
                as_int(jq["node_count"], ctx + ".node_count");
        }
        if (jq.contains("rel_tol")) {
            s.quad.rel_tol = as_double(jq["rel_tol"], ctx + ".rel_tol");
        }
        if (jq.contains("velocity_cutoff")) {
            s.quad.velocity_cutoff =
                as_double(jq["velocity_cutoff"], ctx + ".velocity_cutoff");
        }
        if (jq.contains("max_nodes")) {
            s.quad.max_nodes = as_int(jq["max_nodes"], ctx + ".max_nodes");
        }
    }

    {
        const json& jr = require(j, "grid", origin);
        const std::string ctx = origin + ".grid";
        if (!jr.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(jr, {"min", "max", "n", "unit"}, ctx);
        s.grid.min = as_double(require(jr, "min", ctx), ctx + ".min");
        s.grid.max = as_double(require(jr, "max", ctx), ctx + ".max");
        s.grid.n = as_int(require(jr, "n", ctx), ctx + ".n");
        s.grid.unit =
            as_string(require(jr, "unit", ctx), ctx + ".unit");
    }

    {
        const json& jo = require(j, "outputs", origin);
        if (!jo.is_array()) {
            throw ConfigError(origin + ".outputs: expected an array");
        }
        for (std::size_t i = 0; i < jo.size(); ++i) {
            s.outputs.push_back(as_string(
                jo[i], origin + ".outputs[" + std::to_string(i) + "]"));
        }
    }

    if (j.contains("trace")) {
        const json& jt = j["trace"];
        const std::string ctx = origin + ".trace";
        if (!jt.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(jt, {"v_min", "v_max", "n"}, ctx);
        TraceSpec t;
        t.v_min = as_double(require(jt, "v_min", ctx), ctx + ".v_min");
        t.v_max = as_double(require(jt, "v_max", ctx), ctx + ".v_max");
        t.n = as_int(require(jt, "n", ctx), ctx + ".n");
        s.trace = t;
    }

    if (j.contains("sweep")) {
        const json& jw = j["sweep"];
        const std::string ctx = origin + ".sweep";
        if (!jw.is_object()) {
            throw ConfigError(ctx + ": expected an object");
        }
        check_keys(jw, {"ratios"}, ctx);
        const json& jr = require(jw, "ratios", ctx);
        if (!jr.is_array()) {
            throw ConfigError(ctx + ".ratios: expected an array");
        }
        SweepSpec w;
        for (std::size_t i = 0; i < jr.size(); ++i) {
            w.ratios.push_back(as_double(
                jr[i], ctx + ".ratios[" + std::to_string(i) + "]"));
        }
        s.sweep = w;
    }

    if (j.contains("fit")) {
        const json& jf = j["fit"];
        const std::string ctx = origin + ".fit";
        if (!jf.is_array()) {
            throw ConfigError(ctx + ": expected an array of parameters");
        }
        for (std::size_t i = 0; i < jf.size(); ++i) {
            const json& jp = jf[i];
            const std::string pctx = ctx + "[" + std::to_string(i) + "]";
            if (!jp.is_object()) {
                throw ConfigError(pctx + ": expected an object");
            }
            check_keys(jp, {"name", "lower", "upper", "initial"}, pctx);
            FitParameter p;
            p.name = as_string(require(jp, "name", pctx), pctx + ".name");
            p.lower = parse_quantity(require(jp, "lower", pctx),
                                     s.base.gamma2, pctx + ".lower");
            p.upper = parse_quantity(require(jp, "upper", pctx),
                                     s.base.gamma2, pctx + ".upper");
            p.initial = parse_quantity(require(jp, "initial", pctx),
                                       s.base.gamma2, pctx + ".initial");
            s.fit_params.push_back(std::move(p));
        }
    }

    if (j.contains("seed")) {
        const json& js = j["seed"];
        if (!js.is_number_unsigned() && !js.is_number_integer()) {
            throw ConfigError(origin + ".seed: expected an integer >= 0");
        }
        if (js.is_number_integer() && js.get<long long>() < 0) {
            throw ConfigError(origin + ".seed: expected an integer >= 0");
        }
        s.seed = js.get<std::uint64_t>();
    }

    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scenario file: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();

    Scenario s = scenario_from_text(text.str(), path);
    if (s.name.empty()) {
        s.name = std::filesystem::path(path).stem().string();
    }

    if (const char* env = std::getenv("EITSIM_CONSTANTS");
        env != nullptr && env[0] != '\0') {
        s.constants_file = env;
    } else if (!s.constants_file.empty()) {
        const std::filesystem::path cf(s.constants_file);
        if (cf.is_relative()) {
            s.constants_file =
                (std::filesystem::path(path).parent_path() / cf).string();
        }
    }
    return s;
}

std::string scenario_to_text(const Scenario& s) {
    json j;
    j["name"] = s.name;
    json geoms = json::array();
    for (const Geometry g : s.geometries) {
        geoms.push_back(geometry_name(g));
    }
    j["geometry"] = std::move(geoms);

    auto quantity = [](double value) {
        return json{{"value", value}, {"unit", "rad_s"}};
    };
    j["scheme"] = {{"lambda_p_m", s.base.lambda_p},
                   {"lambda_c_m", s.base.lambda_c},
                   {"gamma2", quantity(s.base.gamma2)},
                   {"gamma3", quantity(s.base.gamma3)},
                   {"gamma_extra", quantity(s.base.gamma_extra)}};
    if (!s.constants_file.empty()) {
        j["constants_file"] = s.constants_file;
    }
    if (!s.gamma_extra_per_isotope.empty()) {
        json m = json::object();
        for (const auto& [isotope, value] : s.gamma_extra_per_isotope) {
            m[isotope] = quantity(value);
        }
        j["gamma_extra_per_isotope"] = std::move(m);
    }
    j["fields"] = {{"delta_c", quantity(s.fields.delta_c)},
                   {"omega_c", quantity(s.fields.omega_c)}};
    j["vapor"] = {{"temperature_K", s.vapor.temperature},
                  {"mass_kg", s.vapor.mass},
                  {"density_per_m3", s.vapor.density},
                  {"length_m", s.vapor.length}};
    j["quadrature"] = {
        {"rule", s.quad.rule == QuadratureSpec::Rule::GaussHermite
                     ? "gauss_hermite"
                     : "adaptive"},
        {"node_count", s.quad.node_count},
        {"rel_tol", s.quad.rel_tol},
        {"velocity_cutoff", s.quad.velocity_cutoff},
        {"max_nodes", s.quad.max_nodes}};
    j["grid"] = {{"min", s.grid.min},
                 {"max", s.grid.max},
                 {"n", s.grid.n},
                 {"unit", s.grid.unit}};
    j["outputs"] = s.outputs;
    if (s.trace) {
        j["trace"] = {{"v_min", s.trace->v_min},
                      {"v_max", s.trace->v_max},
                      {"n", s.trace->n}};
    }
    if (s.sweep) {
        j["sweep"] = {{"ratios", s.sweep->ratios}};
    }
    if (!s.fit_params.empty()) {
        json params = json::array();
        for (const FitParameter& p : s.fit_params) {
            params.push_back({{"name", p.name},
                              {"lower", p.lower},
                              {"upper", p.upper},
                              {"initial", p.initial}});
        }
        j["fit"] = std::move(params);
    }
    j["seed"] = s.seed;
    return j.dump(2) + "\n";
}

std::vector<std::string> run_scenario(const Scenario& scenario,
                                      const RunOptions& options) {
    scenario.validate();
    if (options.threads > 0) {
        set_max_threads(options.threads);
    }
    const std::uint64_t seed = options.seed.value_or(scenario.seed);

    std::vector<std::string> kinds = scenario.outputs;
    if (options.sweep_only) {
        if (!has_output(scenario, "sweep")) {
            throw ConfigError("scenario '" + scenario.name +
                              "' has no sweep output");
        }
        kinds = {"sweep"};
    }
    const auto wants = [&kinds](const char* kind) {
        return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
    };

    const LineStack stack = build_scenario_stack(scenario);
    const std::vector<double> grid = scenario.build_grid();
    const std::string ext = file_extension(options.format);

    OutputBundle bundle(options.out_dir);
    for (const Geometry geometry : scenario.geometries) {
        FieldConfig fields = scenario.fields;
        fields.geometry = geometry;
        const std::string prefix =
            scenario.name + "_" + geometry_name(geometry);

        if (wants("spectrum") || wants("window")) {
            std::vector<std::string> warnings;
            const ComplexSpectrum spec = transmission_spectrum(
                stack, fields, scenario.vapor, scenario.quad, grid,
                &warnings);
            for (const std::string& w : warnings) {
                std::fprintf(stderr, "warning: %s: %s\n",
                             scenario.name.c_str(), w.c_str());
            }
            if (wants("spectrum")) {
                bundle.write(
                    prefix + "_spectrum" + ext,
                    render_spectrum(spec, scenario.base.gamma2,
                                    options.format));
            }
            if (wants("window")) {
                FieldConfig off = fields;
                off.omega_c = 0.0;
                const ComplexSpectrum background = transmission_spectrum(
                    stack, off, scenario.vapor, scenario.quad, grid);
                const WindowReport report = extract_window(
                    spec, background, scenario.base, fields);
                bundle.write(prefix + "_window" +
                                 (options.format == OutputFormat::Json
                                      ? ".json"
                                      : ".txt"),
                             render_window(report, scenario.base.gamma2,
                                           options.format));
            }
        }
        if (wants("eigen_trace")) {
            std::vector<double> v_grid(
                static_cast<std::size_t>(scenario.trace->n));
            for (int i = 0; i < scenario.trace->n; ++i) {
                const double t = static_cast<double>(i) /
                                 static_cast<double>(scenario.trace->n - 1);
                v_grid[static_cast<std::size_t>(i)] =
                    scenario.trace->v_min +
                    (scenario.trace->v_max - scenario.trace->v_min) * t;
            }
            const std::vector<EigenTraceRow> rows =
                eigen_trace(scenario.base, fields, v_grid);
            bundle.write(prefix + "_trace" + ext,
                         render_trace(rows, scenario.base.gamma2,
                                      options.format));
        }
        if (wants("sweep")) {
            const std::vector<RatioSweepRow> rows =
                ratio_sweep(scenario.base, fields, scenario.vapor,
                            scenario.quad, scenario.sweep->ratios);
            bundle.write(prefix + "_sweep" + ext,
                         render_sweep(rows, scenario.base.gamma2,
                                      options.format));
        }
        if (wants("fit") && !options.sweep_only) {
            std::fprintf(stderr,
                         "note: %s: the 'fit' output runs via the fit "
                         "command with a data file\n",
                         scenario.name.c_str());
        }
    }
    bundle.write_manifest(scenario.name, seed);
    return bundle.files();
}

FitResult run_fit(const Scenario& scenario, const std::string& data_path,
                  const RunOptions& options) {
    scenario.validate();
    if (scenario.fit_params.empty()) {
        throw ConfigError("scenario '" + scenario.name +
                          "' has no fit block");
    }
    if (options.threads > 0) {
        set_max_threads(options.threads);
    }

    const MeasuredSpectrum data =
        read_measured_spectrum(data_path, scenario.base.gamma2);

    FitProblem problem;
    problem.stack = build_scenario_stack(scenario);
    problem.fields = scenario.fields;
    problem.fields.geometry = data.direction;
    problem.vapor = scenario.vapor;
    problem.quad = scenario.quad;
    problem.free_params = scenario.fit_params;

    const FitResult result = fit(problem, data);

    OutputBundle bundle(options.out_dir);
    bundle.write(scenario.name + "_fit" +
                     (options.format == OutputFormat::Json ? ".json"
                                                           : ".txt"),
                 render_fit(problem, result, options.format));
    bundle.write_manifest(scenario.name,
                          options.seed.value_or(scenario.seed));
    return result;
}

}  // namespace eit
