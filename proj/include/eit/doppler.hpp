#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "eit/quadrature.hpp"
#include "eit/susceptibility.hpp"
#include "eit/types.hpp"

namespace eit {

/// Velocity-resolved susceptibility kernel in thermal units u = v_z/v_th:
///
///   g(u) = 1 / (a1 - b1 u - |Omega_c|^2 / (a2 - b2 u))
///
/// with a1 = Delta_p + i Gamma'/2, b1 = k_p v_th,
///      a2 = Delta_p + Delta_c + i Gamma_3/2, b2 = (k_p + s k_c) v_th.
/// The geometry enters only through s k_c inside b2. The Doppler-averaged
/// susceptibility is  chi = pref / sqrt(pi) * integral(exp(-u^2) g(u) du).
struct DopplerIntegrand {
    Complex a1;
    Complex a2;
    double b1 = 0.0;
    double b2 = 0.0;
    double omega_sq = 0.0;

    static DopplerIntegrand build(const LadderScheme& scheme,
                                  const FieldConfig& fields,
                                  const VaporEnsemble& vapor, double delta_p);

    Complex operator()(double u) const {
        const Complex one_photon = a1 - b1 * u;
        if (omega_sq == 0.0) {
            return 1.0 / one_photon;
        }
        const Complex two_photon = a2 - b2 * u;
        // rational form: finite through the two-photon resonance
        return two_photon / (one_photon * two_photon - omega_sq);
    }

    /// Complex pole positions of g in the u plane (1 or 2). Their real
    /// parts seed adaptive panel boundaries; their imaginary parts set the
    /// feature widths a discretization has to resolve.
    std::vector<Complex> poles() const;
};

/// Maxwell-Boltzmann average of the ladder susceptibility at probe
/// detuning delta_p (fields.delta_p is ignored; delta_p is the scan
/// variable). Returns the full outcome; does not throw on non-convergence.
QuadratureOutcome doppler_average(const LadderScheme& scheme,
                                  const FieldConfig& fields,
                                  const VaporEnsemble& vapor,
                                  const QuadratureSpec& quad, double delta_p);

/// As doppler_average but returns just the value and throws
/// ConvergenceError when the refinement cap is reached before rel_tol.
Complex doppler_susceptibility(const LadderScheme& scheme,
                               const FieldConfig& fields,
                               const VaporEnsemble& vapor,
                               const QuadratureSpec& quad, double delta_p);

struct McEstimate {
    Complex value{0.0, 0.0};
    double stderr_re = 0.0;
    double stderr_im = 0.0;
    long samples = 0;
};

/// Monte-Carlo average over the full 3-D Maxwell-Boltzmann distribution,
/// with k_c entering as the vector (0, 0, s k_c). The probe detuning is
/// fields.delta_p. Validates the analytic 1-D reduction used by the
/// quadrature path. Deterministic for a given seed via a counter-based
/// stream, independent of thread count.
McEstimate doppler_susceptibility_mc(const LadderScheme& scheme,
                                     const FieldConfig& fields,
                                     const VaporEnsemble& vapor,
                                     long n_samples, std::uint64_t seed);

}  // namespace eit
