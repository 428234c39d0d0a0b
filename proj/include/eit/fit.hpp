#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "eit/spectrum.hpp"
#include "eit/types.hpp"

namespace eit {

/// A measured transmission trace on a strictly increasing detuning grid
/// [rad/s]. Values may exceed 1 (normalization noise) and are preserved.
struct MeasuredSpectrum {
    std::vector<double> grid;
    std::vector<double> transmission;
    Geometry direction = Geometry::Counter;
    std::map<std::string, std::string> meta;
};

/// Read a delimited text spectrum (comma or tab). Expects a header row
/// naming the columns; the detuning column carries its unit in the name
/// (delta_p_MHz, delta_p_Gamma2 or delta_p_rad_s), a `transmission`
/// column is mandatory and an optional `reference` column divides it
/// point by point. Leading `# key: value` lines become meta entries
/// (`direction` selects the geometry). Rows are sorted by detuning;
/// duplicate detunings are rejected. gamma2 converts Gamma2-unit axes
/// and must be > 0 when that unit is used.
MeasuredSpectrum read_measured_spectrum(const std::string& path,
                                        double gamma2 = 0.0);

/// One free parameter of a fit. Recognized names:
///   omega_c             control Rabi frequency [rad/s]
///   delta_c             control detuning [rad/s]
///   amplitude           multiplies the model transmission
///   offset              shift of the measured detuning axis [rad/s]
///   gamma_extra         dephasing applied to every line [rad/s]
///   gamma_extra:<iso>   dephasing for lines whose label starts with <iso>
struct FitParameter {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    double initial = 0.0;

    bool operator==(const FitParameter&) const = default;
};

struct FitProblem {
    LineStack stack;
    FieldConfig fields;
    VaporEnsemble vapor;
    QuadratureSpec quad;
    std::vector<FitParameter> free_params;

    void validate() const;
};

/// Model transmission at the data grid for the given parameter vector
/// (ordered like free_params): T_model(d) = amplitude *
/// exp(-2 Im chi(d - offset) L).
std::vector<double> model_transmission(const FitProblem& problem,
                                       std::span<const double> params,
                                       std::span<const double> grid);

/// r_i = T_model(grid_i; params) - T_data_i. Model evaluation failures are
/// rethrown with the parameter values appended for diagnosis.
std::vector<double> residuals(const FitProblem& problem,
                              std::span<const double> params,
                              const MeasuredSpectrum& data);

struct FitResult {
    std::vector<double> params;         // ordered like free_params
    std::vector<double> uncertainties;  // sqrt of covariance diagonal
    std::vector<bool> bound_hit;
    double rms = 0.0;          // at the returned parameters
    double initial_rms = 0.0;  // at the starting point
    int iterations = 0;
    bool converged = false;
};

/// Damped least squares with finite-difference Jacobians. Bounds are
/// enforced through a smooth sine reparameterization, so the optimizer
/// itself is unconstrained. Only steps that reduce the objective are
/// accepted, which makes the reported rms never exceed initial_rms. The
/// run is deterministic: no randomness, fixed evaluation order.
/// `initial` overrides the per-parameter initial values when nonempty.
FitResult fit(const FitProblem& problem, const MeasuredSpectrum& data,
              std::span<const double> initial = {});

}  // namespace eit
