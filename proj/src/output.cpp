#include "eit/output.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "eit/checksum.hpp"

namespace eit {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string strip_volatile_lines(std::string_view content) {
    std::string out;
    out.reserve(content.size());
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) {
            end = content.size();
        } else {
            ++end;  // keep the newline with its line
        }
        const std::string_view line = content.substr(pos, end - pos);
        if (line.rfind("# generated:", 0) != 0) {
            out += line;
        }
        pos = end;
    }
    return out;
}

std::string render_spectrum(const ComplexSpectrum& spec, double gamma2,
                            OutputFormat format) {
    if (!(gamma2 > 0.0)) {
        throw InvalidInput("gamma2 reference must be > 0");
    }
    if (format == OutputFormat::Json) {
        json j;
        j["columns"] =
            {"delta_p_Gamma2", "re_chi", "im_chi", "transmission"};
        json rows = json::array();
        for (std::size_t i = 0; i < spec.grid.size(); ++i) {
            rows.push_back({spec.grid[i] / gamma2,
                            std::real(spec.chi[i]), std::imag(spec.chi[i]),
                            spec.transmission[i]});
        }
        j["rows"] = std::move(rows);
        return j.dump(2) + "\n";
    }
    std::string out = "# generated: " + iso8601_utc_now() + "\n";
    out += "delta_p_Gamma2,re_chi,im_chi,transmission\n";
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        out += fmt(spec.grid[i] / gamma2) + "," +
               fmt(std::real(spec.chi[i])) + "," +
               fmt(std::imag(spec.chi[i])) + "," +
               fmt(spec.transmission[i]) + "\n";
    }
    return out;
}

std::string render_trace(std::span<const EigenTraceRow> rows, double gamma2,
                         OutputFormat format) {
    if (!(gamma2 > 0.0)) {
        throw InvalidInput("gamma2 reference must be > 0");
    }
    if (format == OutputFormat::Json) {
        json j;
        j["columns"] =
            {"v_z_m_per_s", "lambda_plus_Gamma2", "lambda_minus_Gamma2"};
        json data = json::array();
        for (const EigenTraceRow& row : rows) {
            data.push_back({row.v_z, row.lambda_plus / gamma2,
                            row.lambda_minus / gamma2});
        }
        j["rows"] = std::move(data);
        return j.dump(2) + "\n";
    }
    std::string out = "# generated: " + iso8601_utc_now() + "\n";
    out += "v_z_m_per_s,lambda_plus_Gamma2,lambda_minus_Gamma2\n";
    for (const EigenTraceRow& row : rows) {
        out += fmt(row.v_z) + "," + fmt(row.lambda_plus / gamma2) + "," +
               fmt(row.lambda_minus / gamma2) + "\n";
    }
    return out;
}

std::string render_sweep(std::span<const RatioSweepRow> rows, double gamma2,
                         OutputFormat format) {
    if (!(gamma2 > 0.0)) {
        throw InvalidInput("gamma2 reference must be > 0");
    }
    if (format == OutputFormat::Json) {
        json j;
        j["columns"] =
            {"ratio", "fitted_width_Gamma2", "formula_width_Gamma2"};
        json data = json::array();
        for (const RatioSweepRow& row : rows) {
            data.push_back({row.ratio, row.fitted_width / gamma2,
                            row.formula_width / gamma2});
        }
        j["rows"] = std::move(data);
        return j.dump(2) + "\n";
    }
    std::string out = "# generated: " + iso8601_utc_now() + "\n";
    out += "ratio,fitted_width_Gamma2,formula_width_Gamma2\n";
    for (const RatioSweepRow& row : rows) {
        out += fmt(row.ratio) + "," + fmt(row.fitted_width / gamma2) + "," +
               fmt(row.formula_width / gamma2) + "\n";
    }
    return out;
}

std::string render_window(const WindowReport& report, double gamma2,
                          OutputFormat format) {
    if (!(gamma2 > 0.0)) {
        throw InvalidInput("gamma2 reference must be > 0");
    }
    if (format == OutputFormat::Json) {
        json j;
        j["found"] = report.found;
        j["left_edge_Gamma2"] = report.left_edge / gamma2;
        j["right_edge_Gamma2"] = report.right_edge / gamma2;
        j["width_Gamma2"] = report.width / gamma2;
        j["floor_absorption"] = report.floor_absorption;
        j["formula_width_Gamma2"] = report.formula_width / gamma2;
        j["formula_valid"] = report.formula_valid;
        j["gamma_crossing_Gamma2"] = report.gamma_crossing / gamma2;
        return j.dump(2) + "\n";
    }
    std::string out = "# generated: " + iso8601_utc_now() + "\n";
    out += std::string("found = ") + (report.found ? "true" : "false") +
           "\n";
    out += "left_edge_Gamma2 = " + fmt(report.left_edge / gamma2) + "\n";
    out += "right_edge_Gamma2 = " + fmt(report.right_edge / gamma2) + "\n";
    out += "width_Gamma2 = " + fmt(report.width / gamma2) + "\n";
    out += "floor_absorption = " + fmt(report.floor_absorption) + "\n";
    out += "formula_width_Gamma2 = " + fmt(report.formula_width / gamma2) +
           "\n";
    out += std::string("formula_valid = ") +
           (report.formula_valid ? "true" : "false") + "\n";
    out += "gamma_crossing_Gamma2 = " +
           fmt(report.gamma_crossing / gamma2) + "\n";
    return out;
}

std::string render_fit(const FitProblem& problem, const FitResult& result,
                       OutputFormat format) {
    if (format == OutputFormat::Json) {
        json j;
        j["converged"] = result.converged;
        j["iterations"] = result.iterations;
        j["rms"] = result.rms;
        j["initial_rms"] = result.initial_rms;
        json params = json::array();
        json cov = json::array();
        for (std::size_t i = 0; i < problem.free_params.size(); ++i) {
            params.push_back({{"name", problem.free_params[i].name},
                              {"value", result.params[i]},
                              {"uncertainty", result.uncertainties[i]},
                              {"bound_hit",
                               static_cast<bool>(result.bound_hit[i])}});
            cov.push_back(result.uncertainties[i] *
                          result.uncertainties[i]);
        }
        j["parameters"] = std::move(params);
        j["covariance_diagonal"] = std::move(cov);
        return j.dump(2) + "\n";
    }
    std::string out = "# generated: " + iso8601_utc_now() + "\n";
    out += std::string("converged = ") +
           (result.converged ? "true" : "false") + "\n";
    out += "iterations = " + std::to_string(result.iterations) + "\n";
    out += "rms = " + fmt(result.rms) + "\n";
    out += "initial_rms = " + fmt(result.initial_rms) + "\n";
    for (std::size_t i = 0; i < problem.free_params.size(); ++i) {
        out += "param " + problem.free_params[i].name + " = " +
               fmt(result.params[i]) + " +- " +
               fmt(result.uncertainties[i]) + (result.bound_hit[i]
                                                   ? " (at bound)\n"
                                                   : "\n");
    }
    out += "covariance_diagonal =";
    for (const double u : result.uncertainties) {
        out += " " + fmt(u * u);
    }
    out += "\n";
    return out;
}

OutputBundle::OutputBundle(std::string directory)
    : dir_(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir_ +
                      "': " + ec.message());
    }
}

void OutputBundle::write(const std::string& name,
                         const std::string& content) {
    const std::filesystem::path path =
        std::filesystem::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file: " + path.string());
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("failed writing output file: " + path.string());
    }
    names_.push_back(name);
    checksums_.push_back(checksum_string(strip_volatile_lines(content)));
    sizes_.push_back(content.size());
}

void OutputBundle::write_manifest(const std::string& scenario_name,
                                  std::uint64_t seed) {
    json manifest;
    manifest["scenario"] = scenario_name;
    manifest["generated"] = iso8601_utc_now();
    manifest["seed"] = seed;
    json outputs = json::array();
    for (std::size_t i = 0; i < names_.size(); ++i) {
        outputs.push_back({{"file", names_[i]},
                           {"bytes", sizes_[i]},
                           {"checksum", checksums_[i]}});
    }
    manifest["outputs"] = std::move(outputs);

    const std::filesystem::path path =
        std::filesystem::path(dir_) / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file: " + path.string());
    }
    out << manifest.dump(2) << "\n";
    out.flush();
    if (!out) {
        throw IoError("failed writing output file: " + path.string());
    }
}

}  // namespace eit
