#include "eit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "eit/constants.hpp"

namespace eit {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// Hermite recurrence (zero diagonal, off-diagonal sqrt(j/2)); each weight
// is sqrt(pi) times the squared first component of the corresponding
// eigenvector. Implicit-shift QL on the tridiagonal form, carrying only
// the first eigenvector row, stays accurate at arbitrary order where a
// polynomial-recurrence Newton search loses the root bracketing.
GaussHermiteTable compute_gauss_hermite(int n) {
    std::vector<double> d(n, 0.0);   // diagonal
    std::vector<double> e(n, 0.0);   // off-diagonal, e[i] couples i,i+1
    std::vector<double> z(n, 0.0);   // first row of the rotation product
    for (int i = 0; i + 1 < n; ++i) {
        e[i] = std::sqrt(0.5 * (i + 1));
    }
    z[0] = 1.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 64) {
                    throw NumericError(
                        "Gauss-Hermite eigenvalue iteration stalled");
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&d](int a, int b) { return d[a] < d[b]; });

    const double mu0 = std::sqrt(constants::pi);  // integral of exp(-x^2)
    GaussHermiteTable table;
    table.nodes.resize(n);
    table.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        table.nodes[i] = d[order[i]];
        table.weights[i] = mu0 * z[order[i]] * z[order[i]];
    }

    // enforce the exact +- symmetry of the rule
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double node = 0.5 * (table.nodes[j] - table.nodes[i]);
        const double weight = 0.5 * (table.weights[i] + table.weights[j]);
        table.nodes[i] = -node;
        table.nodes[j] = node;
        table.weights[i] = table.weights[j] = weight;
    }
    if (n % 2 == 1) table.nodes[n / 2] = 0.0;
    return table;
}

std::map<int, GaussHermiteTable>& gh_cache() {
    static std::map<int, GaussHermiteTable> cache;
    return cache;
}

std::mutex& gh_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

const GaussHermiteTable& gauss_hermite_table(int n) {
    if (n < 1) throw InvalidInput("Gauss-Hermite order must be >= 1");
    {
        std::lock_guard<std::mutex> lock(gh_mutex());
        auto it = gh_cache().find(n);
        if (it != gh_cache().end()) return it->second;
    }
    GaussHermiteTable table = compute_gauss_hermite(n);
    std::lock_guard<std::mutex> lock(gh_mutex());
    return gh_cache().emplace(n, std::move(table)).first->second;
}

std::complex<double> gauss_hermite_fixed(
    const std::function<std::complex<double>(double)>& g, int n) {
    const GaussHermiteTable& t = gauss_hermite_table(n);
    std::complex<double> sum(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        sum += t.weights[i] * g(t.nodes[i]);
    }
    return sum;
}

QuadratureOutcome gauss_hermite_refine(
    const std::function<std::complex<double>(double)>& g,
    const QuadratureSpec& spec) {
    spec.validate();
    QuadratureOutcome out;
    int n = spec.node_count;
    std::complex<double> prev = gauss_hermite_fixed(g, n);
    out.evaluations = n;
    out.value = prev;
    out.error_estimate = std::abs(prev);

    while (2 * n <= spec.max_nodes) {
        n *= 2;
        const std::complex<double> cur = gauss_hermite_fixed(g, n);
        out.evaluations += n;
        const double diff = std::abs(cur - prev);
        out.value = cur;
        out.error_estimate = diff;
        if (diff <= spec.rel_tol * std::max(std::abs(cur), 1e-300)) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    out.converged = false;
    return out;
}

namespace {

struct AdaptiveCtx {
    const std::function<std::complex<double>(double)>& f;
    double abs_tol;
    long evals = 0;
    double err = 0.0;
    bool depth_exceeded = false;
};

// Nested Simpson pair: S covers [a,b], refinement splits at the midpoint.
// Accepted when the Richardson defect is within the local budget.
std::complex<double> refine(AdaptiveCtx& ctx, double a, double b,
                            std::complex<double> fa, std::complex<double> fm,
                            std::complex<double> fb, std::complex<double> S,
                            double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double h = b - a;
    const std::complex<double> flm = ctx.f(0.5 * (a + m));
    const std::complex<double> frm = ctx.f(0.5 * (m + b));
    ctx.evals += 2;
    const std::complex<double> Sl = (h / 12.0) * (fa + 4.0 * flm + fm);
    const std::complex<double> Sr = (h / 12.0) * (fm + 4.0 * frm + fb);
    const std::complex<double> S2 = Sl + Sr;
    const double defect = std::abs(S2 - S);
    if (defect <= 15.0 * tol || h <= 1e-14 * (1.0 + std::abs(a))) {
        ctx.err += defect / 15.0;
        return S2 + (S2 - S) / 15.0;
    }
    if (depth >= 48) {
        ctx.depth_exceeded = true;
        ctx.err += defect / 15.0;
        return S2 + (S2 - S) / 15.0;
    }
    return refine(ctx, a, m, fa, flm, fm, Sl, 0.5 * tol, depth + 1) +
           refine(ctx, m, b, fm, frm, fb, Sr, 0.5 * tol, depth + 1);
}

}  // namespace

QuadratureOutcome integrate_adaptive(
    const std::function<std::complex<double>(double)>& f, double lo,
    double hi, std::span<const double> breakpoints, double rel_tol,
    int initial_panels) {
    if (!(hi > lo)) throw InvalidInput("integration interval is empty");
    if (initial_panels < 1) initial_panels = 1;

    // panel edges: uniform seeding plus interior breakpoints
    std::vector<double> edges;
    edges.reserve(initial_panels + 1 + breakpoints.size());
    for (int i = 0; i <= initial_panels; ++i) {
        edges.push_back(lo + (hi - lo) * i / initial_panels);
    }
    for (double b : breakpoints) {
        if (b > lo && b < hi) edges.push_back(b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    struct Panel {
        double a, b;
        std::complex<double> fa, fm, fb, S;
    };
    std::vector<Panel> panels;
    panels.reserve(edges.size() - 1);

    QuadratureOutcome out;
    std::complex<double> coarse(0.0, 0.0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p;
        p.a = edges[i];
        p.b = edges[i + 1];
        const double m = 0.5 * (p.a + p.b);
        p.fa = f(p.a);
        p.fm = f(m);
        p.fb = f(p.b);
        out.evaluations += 3;
        p.S = ((p.b - p.a) / 6.0) * (p.fa + 4.0 * p.fm + p.fb);
        coarse += p.S;
        panels.push_back(p);
    }

    AdaptiveCtx ctx{f, rel_tol * std::max(std::abs(coarse), 1e-300)};
    const double panel_tol = ctx.abs_tol / static_cast<double>(panels.size());
    std::complex<double> total(0.0, 0.0);
    for (const Panel& p : panels) {
        total += refine(ctx, p.a, p.b, p.fa, p.fm, p.fb, p.S, panel_tol, 0);
    }

    out.value = total;
    out.evaluations += ctx.evals;
    out.error_estimate = ctx.err;
    out.converged = !ctx.depth_exceeded;
    return out;
}

}  // namespace eit
