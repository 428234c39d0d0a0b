#pragma once

#include <complex>
#include <span>
#include <vector>

#include "eit/types.hpp"

namespace eit {

using Complex = std::complex<double>;

/// Signed prefactor -3 n0 lambda_p^2 Gamma_2 / (8 pi) of the linear
/// susceptibility, in 1/m.
double susceptibility_prefactor(const LadderScheme& scheme, double density);

/// Two-level Lorentzian susceptibility (control field absent):
///   chi = pref / (Delta_p + i Gamma'/2),  Gamma' = Gamma_2 + gamma_extra.
Complex two_level_susceptibility(const LadderScheme& scheme, double delta_p,
                                 double density);

/// Stationary-atom ladder susceptibility chi(Delta_p).
/// Evaluated in the pole-free rational form
///   chi = pref * (Delta_p + Delta_c + i Gamma_3/2)
///         / ((Delta_p + i Gamma'/2)(Delta_p + Delta_c + i Gamma_3/2) - |Omega_c|^2)
/// which stays finite through the two-photon resonance. Omega_c = 0 falls
/// back to two_level_susceptibility bit-for-bit.
Complex stationary_susceptibility(const LadderScheme& scheme,
                                  const FieldConfig& fields, double density);

/// Control-coupled {|2>,|3>} block of the rotating-frame Hamiltonian for an
/// atom moving with velocity v_z, including the optional position phase of
/// the control field on the off-diagonals.
struct DressedMatrix {
    Complex m11, m12, m21, m22;
};

DressedMatrix dressed_matrix(const LadderScheme& scheme,
                             const FieldConfig& fields, double v_z,
                             double control_phase = 0.0);

/// Closed-form eigenfrequencies of the dressed pair,
///   lambda_pm = -Delta_p + k_p v_z - d/2 +- sqrt(d^2 + 4|Omega_c|^2)/2,
/// with d = Delta_c - s k_c v_z, plus the crossing linewidths.
DressedPair dressed_eigenvalues(const LadderScheme& scheme,
                                const FieldConfig& fields, double v_z);

struct EigenTraceRow {
    double v_z;
    double lambda_plus;
    double lambda_minus;
};

/// Row-wise dressed_eigenvalues over an ordered velocity grid.
std::vector<EigenTraceRow> eigen_trace(const LadderScheme& scheme,
                                       const FieldConfig& fields,
                                       std::span<const double> v_grid);

}  // namespace eit
