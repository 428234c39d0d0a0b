#pragma once

namespace eit::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// SI defining constant (exact)
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K

// CODATA 2018
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

}  // namespace eit::constants
