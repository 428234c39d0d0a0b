#pragma once

#include <span>
#include <string>
#include <vector>

#include "eit/doppler.hpp"
#include "eit/types.hpp"

namespace eit {

/// Doppler-averaged susceptibility and intensity transmission sampled on a
/// strictly increasing probe-detuning grid [rad/s].
struct ComplexSpectrum {
    std::vector<double> grid;
    std::vector<Complex> chi;
    std::vector<double> transmission;
};

/// One absorption line in a multi-line stack. The line's own weight (inside
/// the scheme) times the isotope abundance multiplies its susceptibility.
/// mass overrides the ensemble mass for this line when > 0, so isotopes of
/// different mass can share one vapor description.
struct StackLine {
    LadderScheme scheme;
    double abundance = 1.0;
    double mass = 0.0;  // kg; 0 means use the ensemble mass
    std::string label;
};

struct LineStack {
    std::vector<StackLine> lines;

    void validate() const;
};

/// chi_total(delta_p) = sum over lines of
///   weight * abundance * chi_line(delta_p - detuning_offset),
/// transmission = exp(-2 Im chi_total * L). All lines see the same control
/// field and geometry. Appends a note to *warnings when the grid step is
/// too coarse to resolve min(Gamma_2, Omega_c) with 8 points.
ComplexSpectrum transmission_spectrum(const LineStack& stack,
                                      const FieldConfig& fields,
                                      const VaporEnsemble& vapor,
                                      const QuadratureSpec& quad,
                                      std::span<const double> grid,
                                      std::vector<std::string>* warnings =
                                          nullptr);

struct WindowReport {
    bool found = false;
    double left_edge = 0.0;   // rad/s
    double right_edge = 0.0;  // rad/s
    double width = 0.0;       // right_edge - left_edge; 0 when not found
    double floor_absorption = 1.0;  // min of Im chi / Im chi_bg inside
    double formula_width = 0.0;     // analytic width estimate (rad/s)
    bool formula_valid = false;     // false when k_c < k_p
    double gamma_crossing = 0.0;    // dressed linewidth at the crossing
};

/// Transparency window: the maximal contiguous run of grid points around
/// `center` (the two-photon resonance) where Im chi < (1-threshold) times
/// the background value, with the edges refined by linear interpolation.
/// The background spectrum must be computed with Omega_c = 0 on the exact
/// same grid. Returns found=false (zero width) when the center point does
/// not qualify.
WindowReport extract_window(const ComplexSpectrum& spec,
                            const ComplexSpectrum& background, double center,
                            double threshold = 0.05);

/// Convenience overload: center = -delta_c, and the analytic comparison
/// fields (formula_width, gamma_crossing) are filled from scheme/fields.
WindowReport extract_window(const ComplexSpectrum& spec,
                            const ComplexSpectrum& background,
                            const LadderScheme& scheme,
                            const FieldConfig& fields,
                            double threshold = 0.05);

struct WidthFormula {
    double value = 0.0;
    bool valid = false;
};

/// Analytic transparency-window width 4 Omega_c sqrt(k_p (k_c - k_p)) / k_c
/// for counter-propagating beams near zero detuning. Reports {0, false}
/// for k_c < k_p where the crossing does not exist.
WidthFormula width_formula(const LadderScheme& scheme,
                           const FieldConfig& fields);

struct RatioSweepRow {
    double ratio = 0.0;          // k_c / k_p
    double fitted_width = 0.0;   // from window extraction [rad/s]
    double formula_width = 0.0;  // analytic estimate [rad/s]
    bool window_found = false;
};

/// For each wavenumber ratio, rebuild the scheme with
/// lambda_c = lambda_p / ratio, compute the spectrum and its Omega_c = 0
/// background on an internally chosen grid around the two-photon
/// resonance, and extract the window. Ratios must be positive and sorted.
std::vector<RatioSweepRow> ratio_sweep(const LadderScheme& base,
                                       const FieldConfig& fields,
                                       const VaporEnsemble& vapor,
                                       const QuadratureSpec& quad,
                                       std::span<const double> ratios);

}  // namespace eit
