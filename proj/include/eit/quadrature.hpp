#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "eit/types.hpp"

namespace eit {

/// Discretization of the Maxwell-Boltzmann velocity average. All node
/// placement is in thermal units u = v_z / v_th, so a spec is
/// temperature-independent.
struct QuadratureSpec {
    enum class Rule { GaussHermite, AdaptiveTrapezoid };

    Rule rule = Rule::GaussHermite;
    int node_count = 200;          // initial nodes (GH) / initial panels (adaptive)
    double velocity_cutoff = 8.0;  // adaptive truncation, in units of v_th
    double rel_tol = 1e-6;
    int max_nodes = 3200;          // Gauss-Hermite refinement cap

    bool operator==(const QuadratureSpec&) const = default;

    void validate() const {
        if (node_count < 8) throw InvalidInput("node_count must be >= 8");
        if (!(rel_tol > 0.0) || rel_tol > 1e-2) {
            throw InvalidInput("rel_tol must be in (0, 1e-2]");
        }
        if (velocity_cutoff < 4.0) {
            throw InvalidInput("velocity_cutoff must be >= 4");
        }
        if (max_nodes < node_count) {
            throw InvalidInput("max_nodes must be >= node_count");
        }
    }
};

struct QuadratureOutcome {
    std::complex<double> value{0.0, 0.0};
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = false;
};

/// Raised when a refinement ladder hits its cap before meeting rel_tol.
struct ConvergenceError : NumericError {
    ConvergenceError(const std::string& msg, double estimate, long evals)
        : NumericError(msg), error_estimate(estimate), evaluations(evals) {}
    double error_estimate;
    long evaluations;
};

struct GaussHermiteTable {
    std::vector<double> nodes;    // roots of H_n, ascending
    std::vector<double> weights;  // sum to sqrt(pi)
};

/// Nodes/weights for the physicists' Gauss-Hermite rule, cached per order.
const GaussHermiteTable& gauss_hermite_table(int n);

/// Fixed-order Gauss-Hermite approximation of integral(exp(-u^2) g(u) du).
std::complex<double> gauss_hermite_fixed(
    const std::function<std::complex<double>(double)>& g, int n);

/// Gauss-Hermite with node doubling from spec.node_count up to
/// spec.max_nodes; converged when successive estimates agree to rel_tol.
QuadratureOutcome gauss_hermite_refine(
    const std::function<std::complex<double>(double)>& g,
    const QuadratureSpec& spec);

/// Globally adaptive bisection quadrature of f over [lo, hi]. Interior
/// breakpoints seed panel boundaries so that known narrow features (pole
/// projections onto the real axis) are always sampled. Each panel is
/// refined by interval halving with Richardson acceptance of the nested
/// trapezoid/Simpson pair.
QuadratureOutcome integrate_adaptive(
    const std::function<std::complex<double>(double)>& f, double lo,
    double hi, std::span<const double> breakpoints, double rel_tol,
    int initial_panels);

}  // namespace eit
