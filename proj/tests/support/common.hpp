#pragma once

// Shared fixtures for the test suite: the rubidium ladder used throughout
// (780 nm probe, 488 nm control) and small numeric helpers.

#include <algorithm>
#include <cmath>
#include <complex>

#include "eit/constants.hpp"
#include "eit/types.hpp"

namespace eit::testsupport {

inline LadderScheme rb_ladder() {
    LadderScheme s;
    s.lambda_p = 780.24e-9;
    s.lambda_c = 488.08e-9;
    s.gamma2 = constants::two_pi * 6.07e6;
    s.gamma3 = constants::two_pi * 26.5e3;
    return s;
}

inline VaporEnsemble rb_vapor() {
    VaporEnsemble v;
    v.temperature = 320.0;
    v.mass = 86.909180531 * constants::atomic_mass_unit;
    v.density = 1.2e16;
    v.length = 0.05;
    return v;
}

inline double rel_err(std::complex<double> got, std::complex<double> want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

inline double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

}  // namespace eit::testsupport
