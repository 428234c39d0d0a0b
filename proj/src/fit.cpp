#include "eit/fit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "eit/constants.hpp"

namespace eit {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    for (char& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, delim)) {
        out.push_back(strip(cell));
    }
    return out;
}

double parse_number(const std::string& token, const std::string& context) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ConfigError(context + ": not a number: '" + token + "'");
    }
    if (used != token.size()) {
        throw ConfigError(context + ": trailing junk in number: '" + token +
                          "'");
    }
    return value;
}

}  // namespace

MeasuredSpectrum read_measured_spectrum(const std::string& path,
                                        double gamma2) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open data file: " + path);
    }

    MeasuredSpectrum data;
    std::string raw;
    int lineno = 0;

    // leading "# key: value" annotations
    std::string header;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip(raw);
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const std::size_t colon = line.find(':');
            if (colon != std::string::npos) {
                const std::string key = strip(line.substr(1, colon - 1));
                const std::string value = strip(line.substr(colon + 1));
                if (!key.empty()) {
                    data.meta[key] = value;
                }
            }
            continue;
        }
        header = line;
        break;
    }
    if (header.empty()) {
        throw ConfigError(path + ": missing header row");
    }

    const auto it = data.meta.find("direction");
    if (it != data.meta.end()) {
        const std::string dir = lower(it->second);
        if (dir == "counter") {
            data.direction = Geometry::Counter;
        } else if (dir == "co") {
            data.direction = Geometry::Co;
        } else {
            throw ConfigError(path + ": direction must be 'counter' or "
                                     "'co', got '" +
                              it->second + "'");
        }
    }

    const char delim =
        header.find('\t') != std::string::npos ? '\t' : ',';
    const std::vector<std::string> columns = split(header, delim);
    int col_detuning = -1;
    int col_transmission = -1;
    int col_reference = -1;
    double axis_scale = 0.0;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const std::string& name = columns[i];
        if (name == "delta_p_MHz" || name == "delta_p_Gamma2" ||
            name == "delta_p_rad_s") {
            if (col_detuning >= 0) {
                throw ConfigError(path + ": duplicate detuning column");
            }
            col_detuning = static_cast<int>(i);
            if (name == "delta_p_MHz") {
                axis_scale = constants::two_pi * 1e6;
            } else if (name == "delta_p_Gamma2") {
                if (!(gamma2 > 0.0)) {
                    throw ConfigError(
                        path + ": axis in Gamma2 units needs a reference "
                               "linewidth > 0");
                }
                axis_scale = gamma2;
            } else {
                axis_scale = 1.0;
            }
        } else if (name == "transmission") {
            col_transmission = static_cast<int>(i);
        } else if (name == "reference") {
            col_reference = static_cast<int>(i);
        } else {
            throw ConfigError(path + ": unknown column '" + name + "'");
        }
    }
    if (col_detuning < 0) {
        throw ConfigError(path + ": no detuning column (expected "
                                 "delta_p_MHz, delta_p_Gamma2 or "
                                 "delta_p_rad_s)");
    }
    if (col_transmission < 0) {
        throw ConfigError(path + ": no transmission column");
    }

    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::string context = path + ":" + std::to_string(lineno);
        const std::vector<std::string> cells = split(line, delim);
        if (cells.size() != columns.size()) {
            throw ConfigError(context + ": expected " +
                              std::to_string(columns.size()) +
                              " cells, got " +
                              std::to_string(cells.size()));
        }
        const double x =
            parse_number(cells[col_detuning], context) * axis_scale;
        double t = parse_number(cells[col_transmission], context);
        if (col_reference >= 0) {
            const double ref = parse_number(cells[col_reference], context);
            if (!(ref > 0.0)) {
                throw ConfigError(context + ": reference must be > 0");
            }
            t /= ref;
        }
        if (!std::isfinite(x) || !std::isfinite(t)) {
            throw ConfigError(context + ": non-finite value");
        }
        if (t < 0.0) {
            throw ConfigError(context + ": transmission must be >= 0");
        }
        rows.emplace_back(x, t);
    }
    if (rows.empty()) {
        throw ConfigError(path + ": no data rows");
    }

    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            throw ConfigError(path + ": duplicate detuning value");
        }
    }
    data.grid.reserve(rows.size());
    data.transmission.reserve(rows.size());
    for (const auto& [x, t] : rows) {
        data.grid.push_back(x);
        data.transmission.push_back(t);
    }
    return data;
}

namespace {

bool label_matches(const std::string& label, const std::string& key) {
    return label == key ||
           (label.size() > key.size() &&
            label.compare(0, key.size(), key) == 0 &&
            label[key.size()] == ' ');
}

bool known_parameter(const FitProblem& problem, const std::string& name) {
    if (name == "omega_c" || name == "delta_c" || name == "amplitude" ||
        name == "offset" || name == "gamma_extra") {
        return true;
    }
    if (name.rfind("gamma_extra:", 0) == 0) {
        const std::string key = name.substr(12);
        for (const StackLine& line : problem.stack.lines) {
            if (label_matches(line.label, key)) {
                return true;
            }
        }
    }
    return false;
}

struct ModelContext {
    LineStack stack;
    FieldConfig fields;
    double amplitude = 1.0;
    double offset = 0.0;
};

ModelContext apply_params(const FitProblem& problem,
                          std::span<const double> params) {
    ModelContext ctx{problem.stack, problem.fields, 1.0, 0.0};
    for (std::size_t j = 0; j < problem.free_params.size(); ++j) {
        const std::string& name = problem.free_params[j].name;
        const double value = params[j];
        if (name == "omega_c") {
            ctx.fields.omega_c = value;
        } else if (name == "delta_c") {
            ctx.fields.delta_c = value;
        } else if (name == "amplitude") {
            ctx.amplitude = value;
        } else if (name == "offset") {
            ctx.offset = value;
        } else if (name == "gamma_extra") {
            for (StackLine& line : ctx.stack.lines) {
                line.scheme.gamma_extra = value;
            }
        } else {  // gamma_extra:<key>, validated up front
            const std::string key = name.substr(12);
            for (StackLine& line : ctx.stack.lines) {
                if (label_matches(line.label, key)) {
                    line.scheme.gamma_extra = value;
                }
            }
        }
    }
    return ctx;
}

std::string param_context(const FitProblem& problem,
                          std::span<const double> params) {
    std::string out = "[params:";
    for (std::size_t j = 0; j < problem.free_params.size(); ++j) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %s=%.6g",
                      problem.free_params[j].name.c_str(), params[j]);
        out += buf;
    }
    out += "]";
    return out;
}

// Dense symmetric positive-definite solve for the handful of fit
// parameters; returns false when the matrix is not positive definite.
bool cholesky_solve(std::vector<double> a, int n, std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > 0.0)) {
            return false;
        }
        const double root = std::sqrt(d);
        a[j * n + j] = root;
        for (int i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (int k = 0; k < j; ++k) {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / root;
        }
    }
    // forward then backward substitution in place
    for (int i = 0; i < n; ++i) {
        double v = x[i];
        for (int k = 0; k < i; ++k) {
            v -= a[i * n + k] * x[k];
        }
        x[i] = v / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = x[i];
        for (int k = i + 1; k < n; ++k) {
            v -= a[k * n + i] * x[k];
        }
        x[i] = v / a[i * n + i];
    }
    return true;
}

}  // namespace

void FitProblem::validate() const {
    stack.validate();
    fields.validate();
    vapor.validate();
    quad.validate();
    if (free_params.empty()) {
        throw InvalidInput("fit needs at least one free parameter");
    }
    for (std::size_t j = 0; j < free_params.size(); ++j) {
        const FitParameter& p = free_params[j];
        if (!known_parameter(*this, p.name)) {
            throw InvalidInput("unknown fit parameter '" + p.name + "'");
        }
        for (std::size_t k = j + 1; k < free_params.size(); ++k) {
            if (free_params[k].name == p.name) {
                throw InvalidInput("duplicate fit parameter '" + p.name +
                                   "'");
            }
        }
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) ||
            !(p.lower < p.upper)) {
            throw InvalidInput("bounds of '" + p.name +
                               "' must be finite with lower < upper");
        }
        if (!std::isfinite(p.initial) || p.initial < p.lower ||
            p.initial > p.upper) {
            throw InvalidInput("initial value of '" + p.name +
                               "' must lie within its bounds");
        }
    }
}

std::vector<double> model_transmission(const FitProblem& problem,
                                       std::span<const double> params,
                                       std::span<const double> grid) {
    if (params.size() != problem.free_params.size()) {
        throw InvalidInput("parameter vector length mismatch");
    }
    const ModelContext ctx = apply_params(problem, params);
    std::vector<double> shifted(grid.begin(), grid.end());
    for (double& x : shifted) {
        x -= ctx.offset;
    }
    const ComplexSpectrum spec = transmission_spectrum(
        ctx.stack, ctx.fields, problem.vapor, problem.quad, shifted);
    std::vector<double> out = spec.transmission;
    for (double& t : out) {
        t *= ctx.amplitude;
    }
    return out;
}

std::vector<double> residuals(const FitProblem& problem,
                              std::span<const double> params,
                              const MeasuredSpectrum& data) {
    if (data.grid.size() != data.transmission.size()) {
        throw InvalidInput("data grid/transmission length mismatch");
    }
    std::vector<double> model;
    try {
        model = model_transmission(problem, params, data.grid);
    } catch (const InvalidInput& e) {
        throw NumericError(std::string(e.what()) + " " +
                           param_context(problem, params));
    } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " " +
                           param_context(problem, params));
    }
    std::vector<double> r(model.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = model[i] - data.transmission[i];
    }
    return r;
}

FitResult fit(const FitProblem& problem, const MeasuredSpectrum& data,
              std::span<const double> initial) {
    problem.validate();
    const int m = static_cast<int>(problem.free_params.size());

    std::vector<double> p0(m);
    for (int j = 0; j < m; ++j) {
        p0[j] = problem.free_params[j].initial;
    }
    if (!initial.empty()) {
        if (static_cast<int>(initial.size()) != m) {
            throw InvalidInput("initial guess length mismatch");
        }
        for (int j = 0; j < m; ++j) {
            const FitParameter& fp = problem.free_params[j];
            if (!std::isfinite(initial[j]) || initial[j] < fp.lower ||
                initial[j] > fp.upper) {
                throw InvalidInput("initial guess for '" + fp.name +
                                   "' outside bounds");
            }
            p0[j] = initial[j];
        }
    }

    FitResult result;
    result.params = p0;
    result.uncertainties.assign(m, 0.0);
    result.bound_hit.assign(m, false);

    if (data.grid.empty()) {
        return result;  // nothing to fit against: flagged non-converged
    }

    // bounded parameters through p = lo + (hi-lo)(sin t + 1)/2
    auto to_external = [&](const std::vector<double>& t) {
        std::vector<double> p(m);
        for (int j = 0; j < m; ++j) {
            const FitParameter& fp = problem.free_params[j];
            p[j] = fp.lower +
                   0.5 * (fp.upper - fp.lower) * (std::sin(t[j]) + 1.0);
        }
        return p;
    };
    std::vector<double> t(m);
    for (int j = 0; j < m; ++j) {
        const FitParameter& fp = problem.free_params[j];
        const double y =
            std::clamp(2.0 * (p0[j] - fp.lower) / (fp.upper - fp.lower) -
                           1.0,
                       -1.0, 1.0);
        t[j] = std::asin(y);
    }

    const auto eval = [&](const std::vector<double>& tv) {
        return residuals(problem, to_external(tv), data);
    };
    const auto cost_of = [](const std::vector<double>& r) {
        double c = 0.0;
        for (const double v : r) {
            c += v * v;
        }
        return 0.5 * c;
    };

    std::vector<double> r = eval(t);
    const std::size_t n = r.size();
    double cost = cost_of(r);
    result.initial_rms = std::sqrt(2.0 * cost / static_cast<double>(n));

    const int max_iterations = 200;
    double lambda = -1.0;  // initialized from the first normal matrix
    double nu = 2.0;
    bool converged = false;
    bool aborted = false;
    int iterations = 0;

    std::vector<double> jac(n * m);
    std::vector<double> a(m * m);
    std::vector<double> grad(m);

    while (iterations < max_iterations && !converged && !aborted) {
        // forward-difference Jacobian in the transformed variables
        for (int j = 0; j < m; ++j) {
            const double h = 1e-4 * std::max(1.0, std::abs(t[j]));
            std::vector<double> tj = t;
            tj[j] += h;
            const std::vector<double> rj = eval(tj);
            for (std::size_t i = 0; i < n; ++i) {
                jac[i * m + j] = (rj[i] - r[i]) / h;
            }
        }
        for (int j = 0; j < m; ++j) {
            for (int k = j; k < m; ++k) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    s += jac[i * m + j] * jac[i * m + k];
                }
                a[j * m + k] = s;
                a[k * m + j] = s;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += jac[i * m + j] * r[i];
            }
            grad[j] = s;
        }

        double max_diag = 0.0;
        double max_grad = 0.0;
        for (int j = 0; j < m; ++j) {
            max_diag = std::max(max_diag, a[j * m + j]);
            max_grad = std::max(max_grad, std::abs(grad[j]));
        }
        if (max_grad <= 1e-12 * std::max(1.0, cost)) {
            converged = true;
            break;
        }
        if (lambda < 0.0) {
            lambda = 1e-3 * (max_diag > 0.0 ? max_diag : 1.0);
        }

        bool stepped = false;
        while (!stepped) {
            std::vector<double> damped = a;
            for (int j = 0; j < m; ++j) {
                // keep zero-curvature directions solvable
                const double dj = a[j * m + j] > 0.0 ? a[j * m + j] : 1.0;
                damped[j * m + j] += lambda * dj;
            }
            std::vector<double> step(m);
            for (int j = 0; j < m; ++j) {
                step[j] = -grad[j];
            }
            bool solved = cholesky_solve(damped, m, step);
            double new_cost = 0.0;
            std::vector<double> r_new;
            if (solved) {
                std::vector<double> t_new = t;
                for (int j = 0; j < m; ++j) {
                    t_new[j] += step[j];
                }
                r_new = eval(t_new);
                new_cost = cost_of(r_new);
                if (new_cost < cost) {
                    double predicted = 0.0;
                    for (int j = 0; j < m; ++j) {
                        const double dj =
                            a[j * m + j] > 0.0 ? a[j * m + j] : 1.0;
                        predicted += step[j] * (lambda * dj * step[j] -
                                                grad[j]);
                    }
                    predicted *= 0.5;
                    const double rho =
                        predicted > 0.0 ? (cost - new_cost) / predicted
                                        : 1.0;
                    const double shrink =
                        1.0 - std::pow(2.0 * rho - 1.0, 3.0);
                    lambda *= std::max(1.0 / 3.0, shrink);
                    nu = 2.0;

                    double step_norm = 0.0;
                    double t_norm = 0.0;
                    for (int j = 0; j < m; ++j) {
                        step_norm = std::max(step_norm, std::abs(step[j]));
                        t_norm = std::max(t_norm, std::abs(t_new[j]));
                    }
                    const double gained = cost - new_cost;
                    t = std::move(t_new);
                    r = std::move(r_new);
                    cost = new_cost;
                    stepped = true;
                    ++iterations;
                    if (step_norm <= 1e-10 * (1.0 + t_norm) ||
                        gained <= 1e-13 * std::max(cost, 1e-300)) {
                        converged = true;
                    }
                    break;
                }
            }
            // rejected (or indefinite): raise damping and retry
            lambda *= nu;
            nu *= 2.0;
            if (lambda > 1e16 * std::max(max_diag, 1.0)) {
                // damping exhausted: either we are at a (noisy) stationary
                // point or the problem is degenerate
                converged = max_grad <= 1e-8 * std::max(1.0, cost);
                aborted = !converged;
                stepped = true;
            }
        }
    }

    const std::vector<double> p = to_external(t);
    result.params = p;
    result.iterations = iterations;
    result.converged = converged;
    result.rms = std::sqrt(2.0 * cost / static_cast<double>(n));

    for (int j = 0; j < m; ++j) {
        const FitParameter& fp = problem.free_params[j];
        const double span = fp.upper - fp.lower;
        result.bound_hit[j] = std::min(p[j] - fp.lower, fp.upper - p[j]) <=
                              1e-6 * span;
    }

    // covariance diagonal from the Gauss-Newton matrix at the solution,
    // mapped back through the bound transform's chain rule
    if (n > static_cast<std::size_t>(m)) {
        for (int j = 0; j < m; ++j) {
            const double h = 1e-4 * std::max(1.0, std::abs(t[j]));
            std::vector<double> tj = t;
            tj[j] += h;
            const std::vector<double> rj = eval(tj);
            for (std::size_t i = 0; i < n; ++i) {
                jac[i * m + j] = (rj[i] - r[i]) / h;
            }
        }
        for (int j = 0; j < m; ++j) {
            for (int k = j; k < m; ++k) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    s += jac[i * m + j] * jac[i * m + k];
                }
                a[j * m + k] = s;
                a[k * m + j] = s;
            }
        }
        const double sigma_sq =
            2.0 * cost / static_cast<double>(n - static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            std::vector<double> unit(m, 0.0);
            unit[j] = 1.0;
            std::vector<double> col = unit;
            if (!cholesky_solve(a, m, col)) {
                break;  // singular at the solution: leave zeros
            }
            const FitParameter& fp = problem.free_params[j];
            const double dpdt =
                0.5 * (fp.upper - fp.lower) * std::cos(t[j]);
            const double var = col[j] * sigma_sq * dpdt * dpdt;
            result.uncertainties[j] = var > 0.0 ? std::sqrt(var) : 0.0;
        }
    }
    return result;
}

}  // namespace eit
