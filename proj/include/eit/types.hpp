#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "eit/constants.hpp"

namespace eit {

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Bad configuration: unparsable or inconsistent scenario/constants input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure during evaluation (non-convergence, overflow).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem failure: missing or unwritable files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Relative propagation direction of the control beam with respect to the
/// probe. The probe always travels along +z; the control wavevector enters
/// the Doppler terms as s*k_c with s = -1 (Counter) or s = +1 (Co).
enum class Geometry { Counter, Co };

inline double geometry_sign(Geometry g) {
    return g == Geometry::Counter ? -1.0 : +1.0;
}

inline const char* geometry_name(Geometry g) {
    return g == Geometry::Counter ? "counter" : "co";
}

/// One probe+control transition pair of the three-level ladder.
/// All rates are angular (rad/s); wavelengths in meters.
struct LadderScheme {
    double lambda_p = 0.0;         // probe wavelength [m]
    double lambda_c = 0.0;         // control wavelength [m]
    double gamma2 = 0.0;           // decay rate of |2> [rad/s]
    double gamma3 = 0.0;           // decay rate of |3> [rad/s]
    double gamma_extra = 0.0;      // phenomenological extra decay of |2> [rad/s]
    double weight = 1.0;           // relative line strength
    double detuning_offset = 0.0;  // line center vs scan origin [rad/s]

    bool operator==(const LadderScheme&) const = default;

    double k_p() const { return constants::two_pi / lambda_p; }
    double k_c() const { return constants::two_pi / lambda_c; }

    // total dephasing of the |1>-|2> coherence entering the Lorentzian
    double gamma2_total() const { return gamma2 + gamma_extra; }

    void validate() const;
};

struct FieldConfig {
    double delta_p = 0.0;  // probe detuning [rad/s]
    double delta_c = 0.0;  // control detuning [rad/s]
    double omega_c = 0.0;  // control Rabi frequency |Omega_c| [rad/s]
    Geometry geometry = Geometry::Counter;

    bool operator==(const FieldConfig&) const = default;

    void validate() const;
};

/// Thermal vapor parameters. thermal_speed() is the most probable speed
/// v_th = sqrt(2 k_B T / m) of the Maxwell-Boltzmann distribution.
struct VaporEnsemble {
    double temperature = 0.0;  // [K]
    double mass = 0.0;         // atomic mass [kg]
    double density = 0.0;      // number density [atoms/m^3]
    double length = 0.0;       // cell length [m]

    bool operator==(const VaporEnsemble&) const = default;

    double thermal_speed() const {
        return std::sqrt(2.0 * constants::k_boltzmann * temperature / mass);
    }

    void validate() const;
};

/// Eigenfrequencies and linewidths of the control-dressed {|2>,|3>} pair.
/// gamma_plus/gamma_minus hold the state-crossing value (1 - k_p/k_c)*Gamma_2;
/// it is physically meaningful only where a crossing exists (counter
/// propagation with k_c >= k_p).
struct DressedPair {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
};

}  // namespace eit
