#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eit/fit.hpp"
#include "eit/spectrum.hpp"
#include "eit/susceptibility.hpp"

namespace eit {

enum class OutputFormat { Csv, Json };

/// Current UTC time, e.g. "2026-02-14T09:30:00Z".
std::string iso8601_utc_now();

/// Content with "# generated:" lines removed; manifest checksums are
/// computed over this so reruns of the same scenario verify identically.
std::string strip_volatile_lines(std::string_view content);

/// delta_p_Gamma2, re_chi, im_chi, transmission — gamma2 sets the detuning
/// scale of the first column.
std::string render_spectrum(const ComplexSpectrum& spec, double gamma2,
                            OutputFormat format);

/// v_z_m_per_s, lambda_plus_Gamma2, lambda_minus_Gamma2.
std::string render_trace(std::span<const EigenTraceRow> rows, double gamma2,
                         OutputFormat format);

/// ratio, fitted_width_Gamma2, formula_width_Gamma2.
std::string render_sweep(std::span<const RatioSweepRow> rows, double gamma2,
                         OutputFormat format);

/// Window report as key = value text (Csv format) or a JSON object.
std::string render_window(const WindowReport& report, double gamma2,
                          OutputFormat format);

/// Fit report: fitted values with uncertainties, bound flags, rms,
/// iteration count, covariance diagonal.
std::string render_fit(const FitProblem& problem, const FitResult& result,
                       OutputFormat format);

/// Collects output files for one scenario run: writes each file under the
/// output directory and finally a manifest.json listing name, byte count
/// and content checksum (volatile lines excluded) of everything written.
class OutputBundle {
  public:
    explicit OutputBundle(std::string directory);

    void write(const std::string& name, const std::string& content);
    void write_manifest(const std::string& scenario_name,
                        std::uint64_t seed);

    const std::vector<std::string>& files() const { return names_; }

  private:
    std::string dir_;
    std::vector<std::string> names_;
    std::vector<std::string> checksums_;
    std::vector<std::size_t> sizes_;
};

}  // namespace eit
