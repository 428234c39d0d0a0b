#include "eit/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "eit/parallel.hpp"

namespace eit {

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) {
        throw InvalidInput("grid needs at least 2 points");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) {
            throw InvalidInput("grid values must be finite");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw InvalidInput("grid must be strictly increasing");
        }
    }
}

}  // namespace

void LineStack::validate() const {
    if (lines.empty()) {
        throw InvalidInput("line stack must not be empty");
    }
    double total = 0.0;
    for (const StackLine& line : lines) {
        line.scheme.validate();
        if (!std::isfinite(line.abundance) || line.abundance < 0.0) {
            throw InvalidInput("abundance must be finite and >= 0");
        }
        if (!std::isfinite(line.mass) || line.mass < 0.0) {
            throw InvalidInput("line mass must be finite and >= 0");
        }
        total += line.scheme.weight * line.abundance;
    }
    if (total <= 0.0) {
        throw InvalidInput("total line weight must be > 0");
    }
}

ComplexSpectrum transmission_spectrum(const LineStack& stack,
                                      const FieldConfig& fields,
                                      const VaporEnsemble& vapor,
                                      const QuadratureSpec& quad,
                                      std::span<const double> grid,
                                      std::vector<std::string>* warnings) {
    stack.validate();
    fields.validate();
    vapor.validate();
    quad.validate();
    check_grid(grid);

    double max_step = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        max_step = std::max(max_step, grid[i] - grid[i - 1]);
    }
    double feature = std::numeric_limits<double>::infinity();
    for (const StackLine& line : stack.lines) {
        feature = std::min(feature, line.scheme.gamma2);
    }
    if (fields.omega_c > 0.0) {
        feature = std::min(feature, fields.omega_c);
    }
    // The epsilon keeps a grid chosen exactly at the 8-point boundary from
    // warning on rounding in the step differences.
    if (warnings != nullptr && max_step > (feature / 8.0) * (1.0 + 1e-9)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "grid step %.3e rad/s resolves the narrowest feature "
                      "(%.3e rad/s) with fewer than 8 points",
                      max_step, feature);
        warnings->emplace_back(buf);
    }

    ComplexSpectrum out;
    out.grid.assign(grid.begin(), grid.end());
    out.chi.resize(grid.size());
    out.transmission.resize(grid.size());

    parallel_for(grid.size(), [&](std::size_t i) {
        Complex total{0.0, 0.0};
        for (const StackLine& line : stack.lines) {
            VaporEnsemble line_vapor = vapor;
            if (line.mass > 0.0) {
                line_vapor.mass = line.mass;
            }
            const Complex chi = doppler_susceptibility(
                line.scheme, fields, line_vapor, quad,
                grid[i] - line.scheme.detuning_offset);
            total += line.scheme.weight * line.abundance * chi;
        }
        out.chi[i] = total;
        out.transmission[i] =
            std::exp(-2.0 * std::imag(total) * vapor.length);
    });
    return out;
}

WindowReport extract_window(const ComplexSpectrum& spec,
                            const ComplexSpectrum& background, double center,
                            double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InvalidInput("threshold must be in (0, 1)");
    }
    if (spec.grid.size() != background.grid.size() ||
        !std::equal(spec.grid.begin(), spec.grid.end(),
                    background.grid.begin())) {
        throw InvalidInput("spectrum and background grids must match");
    }
    if (spec.grid.size() != spec.chi.size() ||
        background.grid.size() != background.chi.size()) {
        throw InvalidInput("spectrum arrays must have matching lengths");
    }
    check_grid(spec.grid);

    WindowReport report;
    if (center < spec.grid.front() || center > spec.grid.back()) {
        return report;  // resonance outside the sampled range
    }

    const std::size_t n = spec.grid.size();
    // qualifies[i]: absorption at least `threshold` below the background
    auto qualifies = [&](std::size_t i) {
        return std::imag(spec.chi[i]) <
               (1.0 - threshold) * std::imag(background.chi[i]);
    };

    const auto upper = std::upper_bound(spec.grid.begin(), spec.grid.end(),
                                        center);
    std::size_t ic = static_cast<std::size_t>(
        std::distance(spec.grid.begin(), upper));
    if (ic == n || (ic > 0 && center - spec.grid[ic - 1] <=
                                  spec.grid[ic] - center)) {
        --ic;  // nearest grid point to the resonance
    }
    if (!qualifies(ic)) {
        return report;
    }

    std::size_t lo = ic;
    while (lo > 0 && qualifies(lo - 1)) {
        --lo;
    }
    std::size_t hi = ic;
    while (hi + 1 < n && qualifies(hi + 1)) {
        ++hi;
    }

    // depth of the dip below the qualification line; zero at the edges
    auto excess = [&](std::size_t i) {
        return std::imag(spec.chi[i]) -
               (1.0 - threshold) * std::imag(background.chi[i]);
    };
    double left = spec.grid[lo];
    if (lo > 0) {
        const double f0 = excess(lo - 1);  // > 0 (does not qualify)
        const double f1 = excess(lo);      // < 0 (qualifies)
        const double t = f0 / (f0 - f1);
        left = spec.grid[lo - 1] + t * (spec.grid[lo] - spec.grid[lo - 1]);
    }
    double right = spec.grid[hi];
    if (hi + 1 < n) {
        const double f0 = excess(hi);      // < 0
        const double f1 = excess(hi + 1);  // > 0
        const double t = f0 / (f0 - f1);
        right = spec.grid[hi] + t * (spec.grid[hi + 1] - spec.grid[hi]);
    }

    double floor_ratio = 1.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double bg = std::imag(background.chi[i]);
        if (bg > 0.0) {
            floor_ratio = std::min(floor_ratio, std::imag(spec.chi[i]) / bg);
        }
    }

    report.found = true;
    report.left_edge = left;
    report.right_edge = right;
    report.width = right - left;
    report.floor_absorption = floor_ratio;
    return report;
}

WindowReport extract_window(const ComplexSpectrum& spec,
                            const ComplexSpectrum& background,
                            const LadderScheme& scheme,
                            const FieldConfig& fields, double threshold) {
    scheme.validate();
    fields.validate();
    WindowReport report =
        extract_window(spec, background, -fields.delta_c, threshold);
    const WidthFormula formula = width_formula(scheme, fields);
    report.formula_width = formula.value;
    report.formula_valid = formula.valid;
    report.gamma_crossing =
        (1.0 - scheme.k_p() / scheme.k_c()) * scheme.gamma2;
    return report;
}

WidthFormula width_formula(const LadderScheme& scheme,
                           const FieldConfig& fields) {
    scheme.validate();
    fields.validate();
    const double k_p = scheme.k_p();
    const double k_c = scheme.k_c();
    if (k_c < k_p) {
        return {0.0, false};  // no state crossing for any velocity class
    }
    return {4.0 * fields.omega_c * std::sqrt(k_p * (k_c - k_p)) / k_c, true};
}

std::vector<RatioSweepRow> ratio_sweep(const LadderScheme& base,
                                       const FieldConfig& fields,
                                       const VaporEnsemble& vapor,
                                       const QuadratureSpec& quad,
                                       std::span<const double> ratios) {
    base.validate();
    fields.validate();
    vapor.validate();
    quad.validate();
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!std::isfinite(ratios[i]) || ratios[i] <= 0.0) {
            throw InvalidInput("ratios must be finite and > 0");
        }
        if (i > 0 && ratios[i] < ratios[i - 1]) {
            throw InvalidInput("ratios must be sorted ascending");
        }
    }

    // window region: a few control Rabi widths around the two-photon
    // resonance is enough for the edge detection; the pointwise background
    // comparison does not need the full Doppler profile
    const double center = -fields.delta_c;
    const double half =
        std::max(8.0 * fields.omega_c, 12.0 * base.gamma2);
    const std::size_t n_pts = 961;
    std::vector<double> grid(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i) {
        grid[i] = center - half +
                  2.0 * half * static_cast<double>(i) /
                      static_cast<double>(n_pts - 1);
    }

    FieldConfig bg_fields = fields;
    bg_fields.omega_c = 0.0;

    std::vector<RatioSweepRow> rows;
    rows.reserve(ratios.size());
    for (const double ratio : ratios) {
        LadderScheme scheme = base;
        scheme.lambda_c = base.lambda_p / ratio;

        const LineStack stack{{StackLine{scheme, 1.0, 0.0, ""}}};
        const ComplexSpectrum spec =
            transmission_spectrum(stack, fields, vapor, quad, grid);
        const ComplexSpectrum bg =
            transmission_spectrum(stack, bg_fields, vapor, quad, grid);
        const WindowReport window =
            extract_window(spec, bg, scheme, fields);

        RatioSweepRow row;
        row.ratio = ratio;
        row.fitted_width = window.width;
        row.formula_width = window.formula_width;
        row.window_found = window.found;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace eit
