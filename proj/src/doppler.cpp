#include "eit/doppler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eit/constants.hpp"
#include "eit/rng.hpp"

namespace eit {

namespace {

// Stable roots of the complex quadratic A u^2 + B u + C = 0 (A != 0):
// pick the sign that avoids cancellation in -B -/+ sqrt(disc), then pair
// the second root through the product C/A.
std::pair<Complex, Complex> quadratic_roots(Complex A, Complex B, Complex C) {
    const Complex disc = B * B - 4.0 * A * C;
    Complex root = std::sqrt(disc);
    if (std::real(std::conj(B) * root) < 0.0) {
        root = -root;
    }
    const Complex q = -0.5 * (B + root);
    return {q / A, C / q};
}

}  // namespace

DopplerIntegrand DopplerIntegrand::build(const LadderScheme& scheme,
                                         const FieldConfig& fields,
                                         const VaporEnsemble& vapor,
                                         double delta_p) {
    const double v_th = vapor.thermal_speed();
    const double s = geometry_sign(fields.geometry);
    DopplerIntegrand g;
    g.a1 = Complex{delta_p, 0.5 * scheme.gamma2_total()};
    g.a2 = Complex{delta_p + fields.delta_c, 0.5 * scheme.gamma3};
    g.b1 = scheme.k_p() * v_th;
    g.b2 = (scheme.k_p() + s * scheme.k_c()) * v_th;
    g.omega_sq = fields.omega_c * fields.omega_c;
    return g;
}

std::vector<Complex> DopplerIntegrand::poles() const {
    if (omega_sq == 0.0) {
        return {a1 / b1};
    }
    if (b2 == 0.0) {
        // control shift cancels the probe shift exactly; g collapses to a
        // single shifted Lorentzian 1/(a1 - omega_sq/a2 - b1 u)
        return {(a1 - omega_sq / a2) / b1};
    }
    const auto [r1, r2] =
        quadratic_roots(Complex{b1 * b2, 0.0}, -(a1 * b2 + a2 * b1),
                        a1 * a2 - omega_sq);
    return {r1, r2};
}

QuadratureOutcome doppler_average(const LadderScheme& scheme,
                                  const FieldConfig& fields,
                                  const VaporEnsemble& vapor,
                                  const QuadratureSpec& quad, double delta_p) {
    scheme.validate();
    fields.validate();
    vapor.validate();
    quad.validate();
    if (!std::isfinite(delta_p)) {
        throw InvalidInput("delta_p must be finite");
    }

    if (vapor.density == 0.0) {
        QuadratureOutcome out;
        out.converged = true;
        return out;  // prefactor vanishes; skip the integral entirely
    }

    const DopplerIntegrand g =
        DopplerIntegrand::build(scheme, fields, vapor, delta_p);
    const double pref = susceptibility_prefactor(scheme, vapor.density) /
                        std::sqrt(constants::pi);

    QuadratureOutcome out;
    if (quad.rule == QuadratureSpec::Rule::GaussHermite) {
        out = gauss_hermite_refine([&g](double u) { return g(u); }, quad);
    } else {
        const double cut = quad.velocity_cutoff;
        std::vector<double> breaks;
        for (const Complex& p : g.poles()) {
            const double x = std::real(p);
            if (x > -cut && x < cut) {
                breaks.push_back(x);
            }
        }
        out = integrate_adaptive(
            [&g](double u) { return std::exp(-u * u) * g(u); }, -cut, cut,
            breaks, quad.rel_tol, quad.node_count);
    }
    out.value *= pref;
    out.error_estimate *= std::abs(pref);
    return out;
}

Complex doppler_susceptibility(const LadderScheme& scheme,
                               const FieldConfig& fields,
                               const VaporEnsemble& vapor,
                               const QuadratureSpec& quad, double delta_p) {
    const QuadratureOutcome out =
        doppler_average(scheme, fields, vapor, quad, delta_p);
    if (!out.converged) {
        throw ConvergenceError(
            "velocity average did not reach rel_tol=" +
                std::to_string(quad.rel_tol) + " (error estimate " +
                std::to_string(out.error_estimate) + " after " +
                std::to_string(out.evaluations) + " evaluations)",
            out.error_estimate, out.evaluations);
    }
    return out.value;
}

McEstimate doppler_susceptibility_mc(const LadderScheme& scheme,
                                     const FieldConfig& fields,
                                     const VaporEnsemble& vapor,
                                     long n_samples, std::uint64_t seed) {
    scheme.validate();
    fields.validate();
    vapor.validate();
    if (n_samples < 10000) {
        throw InvalidInput("n_samples must be >= 10000");
    }

    McEstimate est;
    est.samples = n_samples;
    if (vapor.density == 0.0) {
        return est;
    }

    const double v_th = vapor.thermal_speed();
    const double sigma = v_th / std::sqrt(2.0);  // per-component MB sigma
    const double s = geometry_sign(fields.geometry);
    const double k_p = scheme.k_p();
    // control wavevector as a full 3-D vector; only its z component is
    // nonzero for collinear beams, which is what the 1-D reduction assumes
    const double kc_x = 0.0;
    const double kc_y = 0.0;
    const double kc_z = s * scheme.k_c();

    const Complex a1{fields.delta_p, 0.5 * scheme.gamma2_total()};
    const Complex a2{fields.delta_p + fields.delta_c, 0.5 * scheme.gamma3};
    const double omega_sq = fields.omega_c * fields.omega_c;

    const CounterRng rng{seed};
    double sum_re = 0.0, sum_im = 0.0;
    double sumsq_re = 0.0, sumsq_im = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        double vx, vy, vz, spare;
        rng.normal_pair(static_cast<std::uint64_t>(i), 0, vx, vy);
        rng.normal_pair(static_cast<std::uint64_t>(i), 1, vz, spare);
        vx *= sigma;
        vy *= sigma;
        vz *= sigma;

        const Complex one_photon = a1 - k_p * vz;
        Complex val;
        if (omega_sq == 0.0) {
            val = 1.0 / one_photon;
        } else {
            const Complex two_photon =
                a2 - (k_p * vz + kc_x * vx + kc_y * vy + kc_z * vz);
            val = two_photon / (one_photon * two_photon - omega_sq);
        }
        const double re = std::real(val);
        const double im = std::imag(val);
        sum_re += re;
        sum_im += im;
        sumsq_re += re * re;
        sumsq_im += im * im;
    }

    const double n = static_cast<double>(n_samples);
    const double mean_re = sum_re / n;
    const double mean_im = sum_im / n;
    const double var_re = std::max(0.0, sumsq_re / n - mean_re * mean_re);
    const double var_im = std::max(0.0, sumsq_im / n - mean_im * mean_im);

    const double pref = susceptibility_prefactor(scheme, vapor.density);
    est.value = pref * Complex{mean_re, mean_im};
    est.stderr_re = std::abs(pref) * std::sqrt(var_re / (n - 1.0));
    est.stderr_im = std::abs(pref) * std::sqrt(var_im / (n - 1.0));
    return est;
}

}  // namespace eit
