#include "eit/susceptibility.hpp"

#include <cmath>

namespace eit {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw InvalidInput(std::string(what) + " must be finite");
    }
}

}  // namespace

void LadderScheme::validate() const {
    require_finite(lambda_p, "lambda_p");
    require_finite(lambda_c, "lambda_c");
    require_finite(gamma2, "gamma2");
    require_finite(gamma3, "gamma3");
    require_finite(gamma_extra, "gamma_extra");
    require_finite(weight, "weight");
    require_finite(detuning_offset, "detuning_offset");
    if (lambda_p <= 0.0) throw InvalidInput("lambda_p must be > 0");
    if (lambda_c <= 0.0) throw InvalidInput("lambda_c must be > 0");
    if (gamma2 <= 0.0) throw InvalidInput("gamma2 must be > 0");
    if (gamma3 < 0.0) throw InvalidInput("gamma3 must be >= 0");
    if (gamma_extra < 0.0) throw InvalidInput("gamma_extra must be >= 0");
    if (weight < 0.0) throw InvalidInput("weight must be >= 0");
}

void FieldConfig::validate() const {
    require_finite(delta_p, "delta_p");
    require_finite(delta_c, "delta_c");
    require_finite(omega_c, "omega_c");
    if (omega_c < 0.0) throw InvalidInput("omega_c must be >= 0");
}

void VaporEnsemble::validate() const {
    require_finite(temperature, "temperature");
    require_finite(mass, "mass");
    require_finite(density, "density");
    require_finite(length, "length");
    if (temperature <= 0.0) throw InvalidInput("temperature must be > 0");
    if (mass <= 0.0) throw InvalidInput("mass must be > 0");
    if (density < 0.0) throw InvalidInput("density must be >= 0");
    if (length <= 0.0) throw InvalidInput("length must be > 0");
}

double susceptibility_prefactor(const LadderScheme& scheme, double density) {
    return -3.0 * density * scheme.lambda_p * scheme.lambda_p * scheme.gamma2 /
           (8.0 * constants::pi);
}

Complex two_level_susceptibility(const LadderScheme& scheme, double delta_p,
                                 double density) {
    scheme.validate();
    require_finite(delta_p, "delta_p");
    require_finite(density, "density");
    if (density < 0.0) throw InvalidInput("density must be >= 0");
    const double pref = susceptibility_prefactor(scheme, density);
    return pref / Complex(delta_p, 0.5 * scheme.gamma2_total());
}

Complex stationary_susceptibility(const LadderScheme& scheme,
                                  const FieldConfig& fields, double density) {
    scheme.validate();
    fields.validate();
    require_finite(density, "density");
    if (density < 0.0) throw InvalidInput("density must be >= 0");

    if (fields.omega_c == 0.0) {
        return two_level_susceptibility(scheme, fields.delta_p, density);
    }

    const double pref = susceptibility_prefactor(scheme, density);
    const Complex one_photon(fields.delta_p, 0.5 * scheme.gamma2_total());
    const Complex two_photon(fields.delta_p + fields.delta_c,
                             0.5 * scheme.gamma3);
    const Complex den =
        one_photon * two_photon - fields.omega_c * fields.omega_c;
    if (den == Complex(0.0, 0.0)) {
        // unreachable for valid inputs (Gamma_2 > 0), kept as a guard
        throw InvalidInput("singular susceptibility denominator");
    }
    return pref * two_photon / den;
}

DressedMatrix dressed_matrix(const LadderScheme& scheme,
                             const FieldConfig& fields, double v_z,
                             double control_phase) {
    scheme.validate();
    fields.validate();
    require_finite(v_z, "v_z");

    const double s = geometry_sign(fields.geometry);
    const double kc_dot_v = s * scheme.k_c() * v_z;
    const Complex phase = std::polar(1.0, control_phase);
    DressedMatrix m;
    m.m11 = Complex(-fields.delta_p + scheme.k_p() * v_z, 0.0);
    m.m12 = fields.omega_c * std::conj(phase);
    m.m21 = fields.omega_c * phase;
    m.m22 = Complex(-fields.delta_p - fields.delta_c + scheme.k_p() * v_z +
                        kc_dot_v,
                    0.0);
    return m;
}

DressedPair dressed_eigenvalues(const LadderScheme& scheme,
                                const FieldConfig& fields, double v_z) {
    scheme.validate();
    fields.validate();
    require_finite(v_z, "v_z");

    const double s = geometry_sign(fields.geometry);
    const double d = fields.delta_c - s * scheme.k_c() * v_z;
    const double mean = -fields.delta_p + scheme.k_p() * v_z - 0.5 * d;
    const double half_gap = 0.5 * std::hypot(d, 2.0 * fields.omega_c);

    DressedPair pair;
    pair.lambda_plus = mean + half_gap;
    pair.lambda_minus = mean - half_gap;
    pair.gamma_plus = pair.gamma_minus =
        (1.0 - scheme.k_p() / scheme.k_c()) * scheme.gamma2;
    return pair;
}

std::vector<EigenTraceRow> eigen_trace(const LadderScheme& scheme,
                                       const FieldConfig& fields,
                                       std::span<const double> v_grid) {
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
        require_finite(v_grid[i], "v_grid");
        if (i > 0 && !(v_grid[i] > v_grid[i - 1])) {
            throw InvalidInput("v_grid must be strictly increasing");
        }
    }
    std::vector<EigenTraceRow> rows;
    rows.reserve(v_grid.size());
    for (double v : v_grid) {
        const DressedPair p = dressed_eigenvalues(scheme, fields, v);
        rows.push_back({v, p.lambda_plus, p.lambda_minus});
    }
    return rows;
}

}  // namespace eit
