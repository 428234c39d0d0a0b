#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "eit/spectrum.hpp"
#include "support/common.hpp"

using namespace eit;

namespace {

using Complex = std::complex<double>;

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

QuadratureSpec adaptive_quad() {
    QuadratureSpec q;
    q.rule = QuadratureSpec::Rule::AdaptiveTrapezoid;
    q.node_count = 24;
    q.rel_tol = 1e-7;
    return q;
}

// Broad-line parameters keep the velocity integrand smooth enough for the
// default Gauss-Hermite rule, so the cheap tests stay cheap.
LadderScheme broad_ladder() {
    LadderScheme s = testsupport::rb_ladder();
    s.gamma_extra = 20.0 * s.gamma2;
    s.gamma3 = 8.0 * s.gamma2;
    return s;
}

LineStack single_line(const LadderScheme& scheme) {
    LineStack stack;
    StackLine line;
    line.scheme = scheme;
    line.label = "line";
    stack.lines.push_back(line);
    return stack;
}

// Triangular absorption dip on a constant background, built by hand so the
// window edges have closed-form positions.
struct SyntheticPair {
    ComplexSpectrum spec;
    ComplexSpectrum background;
};

SyntheticPair triangle_dip() {
    SyntheticPair p;
    const int n = 401;
    p.spec.grid.resize(n);
    p.background.grid.resize(n);
    p.spec.chi.resize(n);
    p.background.chi.resize(n);
    p.spec.transmission.resize(n);
    p.background.transmission.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i - 200) / 100.0;  // -2 .. 2, exact zero at i=200
        const double dip = std::max(0.0, 1.0 - std::abs(x));
        p.spec.grid[i] = x;
        p.background.grid[i] = x;
        p.spec.chi[i] = Complex(0.0, 2.0 - 1.8 * dip);
        p.background.chi[i] = Complex(0.0, 2.0);
        p.spec.transmission[i] = std::exp(-2.0 * p.spec.chi[i].imag());
        p.background.transmission[i] = std::exp(-4.0);
    }
    return p;
}

}  // namespace

TEST_CASE("analytic window width formula") {
    FieldConfig f;
    f.omega_c = 2 * constants::pi * 9.1e6;

    LadderScheme s = testsupport::rb_ladder();

    SUBCASE("frozen value at wavenumber ratio 1.6") {
        s.lambda_c = s.lambda_p / 1.6;
        const WidthFormula w = width_formula(s, f);
        // 4 sqrt(0.6) / 1.6 = 1.9364916731037085
        CHECK(w.valid);
        CHECK(w.value ==
              doctest::Approx(1.9364916731037085 * f.omega_c).epsilon(1e-13));
    }

    SUBCASE("k_c = 2 k_p gives exactly 2 Omega_c") {
        s.lambda_c = s.lambda_p / 2.0;
        const WidthFormula w = width_formula(s, f);
        CHECK(w.valid);
        CHECK(w.value == doctest::Approx(2.0 * f.omega_c).epsilon(1e-13));
    }

    SUBCASE("k_c = 2 k_p is the maximum over the control wavenumber") {
        auto width_at = [&](double ratio) {
            LadderScheme t = s;
            t.lambda_c = t.lambda_p / ratio;
            return width_formula(t, f).value;
        };
        const double peak = width_at(2.0);
        for (double ratio : {1.2, 1.5, 1.9, 2.1, 2.5, 4.0, 8.0})
            CHECK(width_at(ratio) < peak);
    }

    SUBCASE("degenerate wavenumbers give zero width but stay valid") {
        s.lambda_c = s.lambda_p;
        const WidthFormula w = width_formula(s, f);
        CHECK(w.valid);
        CHECK(w.value == 0.0);
    }

    SUBCASE("k_c below k_p has no crossing") {
        s.lambda_c = s.lambda_p / 0.8;
        const WidthFormula w = width_formula(s, f);
        CHECK_FALSE(w.valid);
        CHECK(w.value == 0.0);
    }
}

TEST_CASE("empty vapor transmits everything") {
    LineStack stack = single_line(broad_ladder());
    FieldConfig f;
    f.omega_c = 2.0 * stack.lines[0].scheme.gamma2;

    VaporEnsemble v = testsupport::rb_vapor();
    v.density = 0.0;

    QuadratureSpec q;
    const auto grid = linspace(-1e8, 1e8, 9);
    const ComplexSpectrum spec = transmission_spectrum(stack, f, v, q, grid);

    REQUIRE(spec.grid.size() == 9);
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        CHECK(spec.chi[i] == Complex(0.0, 0.0));
        CHECK(spec.transmission[i] == 1.0);
    }
}

TEST_CASE("stack susceptibility is the weighted sum of shifted lines") {
    const LadderScheme base = broad_ladder();
    const double g2 = base.gamma2;

    LadderScheme a = base;
    a.weight = 0.7;
    a.detuning_offset = 3.0 * g2;
    LadderScheme b = base;
    b.weight = 0.3;
    b.gamma_extra = 25.0 * g2;
    b.detuning_offset = -2.0 * g2;

    const double mass_a = 86.909180531 * constants::atomic_mass_unit;
    const double mass_b = 84.911789738 * constants::atomic_mass_unit;

    LineStack stack;
    stack.lines.push_back({a, 0.72, mass_a, "a"});
    stack.lines.push_back({b, 0.28, mass_b, "b"});

    FieldConfig f;
    f.omega_c = 2.0 * g2;
    f.geometry = Geometry::Counter;

    VaporEnsemble v = testsupport::rb_vapor();
    QuadratureSpec q;

    const auto grid = linspace(-6.0 * g2, 6.0 * g2, 7);
    const ComplexSpectrum spec = transmission_spectrum(stack, f, v, q, grid);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        Complex expected = 0.0;
        for (const StackLine& line : stack.lines) {
            VaporEnsemble lv = v;
            lv.mass = line.mass;
            expected += line.scheme.weight * line.abundance *
                        doppler_susceptibility(
                            line.scheme, f, lv, q,
                            grid[i] - line.scheme.detuning_offset);
        }
        CHECK(testsupport::rel_err(spec.chi[i], expected) < 1e-13);
        CHECK(spec.transmission[i] ==
              doctest::Approx(std::exp(-2.0 * spec.chi[i].imag() * v.length))
                  .epsilon(1e-13));
    }
}

TEST_CASE("per-line mass override matches changing the ensemble mass") {
    const LadderScheme s = broad_ladder();
    const double other_mass = 84.911789738 * constants::atomic_mass_unit;

    FieldConfig f;
    f.omega_c = 1.5 * s.gamma2;

    VaporEnsemble v = testsupport::rb_vapor();
    QuadratureSpec q;
    const auto grid = linspace(-4.0 * s.gamma2, 4.0 * s.gamma2, 5);

    LineStack overridden = single_line(s);
    overridden.lines[0].mass = other_mass;
    const ComplexSpectrum with_override =
        transmission_spectrum(overridden, f, v, q, grid);

    VaporEnsemble v2 = v;
    v2.mass = other_mass;
    const ComplexSpectrum reference =
        transmission_spectrum(single_line(s), f, v2, q, grid);

    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(with_override.chi[i] == reference.chi[i]);
}

TEST_CASE("transmission stays within physical bounds") {
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const LadderScheme base = testsupport::rb_ladder();
    const double g2 = base.gamma2;

    for (int draw = 0; draw < 8; ++draw) {
        LadderScheme s = base;
        s.gamma_extra = (10.0 + 20.0 * unit(rng)) * g2;
        s.gamma3 = (5.0 + 10.0 * unit(rng)) * g2;

        FieldConfig f;
        f.omega_c = 4.0 * g2 * unit(rng);
        f.delta_c = (unit(rng) - 0.5) * 10.0 * g2;
        f.geometry = unit(rng) < 0.5 ? Geometry::Counter : Geometry::Co;

        VaporEnsemble v = testsupport::rb_vapor();
        v.density = 1e16 * (0.2 + unit(rng));
        v.length = 0.02 + 0.06 * unit(rng);

        const QuadratureSpec q = adaptive_quad();
        const auto grid = linspace(-60.0 * g2, 60.0 * g2, 9);
        const ComplexSpectrum spec =
            transmission_spectrum(single_line(s), f, v, q, grid);

        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(spec.transmission[i] > 0.0);
            CHECK(spec.transmission[i] <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("window extraction on a synthetic triangular dip") {
    const SyntheticPair p = triangle_dip();

    SUBCASE("edges and floor have their closed-form values") {
        // Im chi drops below (1-0.05)*2 = 1.9 where |x| < 17/18; the profile
        // is linear across each edge so interpolation lands exactly there.
        const WindowReport w = extract_window(p.spec, p.background, 0.0, 0.05);
        REQUIRE(w.found);
        CHECK(w.left_edge == doctest::Approx(-17.0 / 18.0).epsilon(1e-12));
        CHECK(w.right_edge == doctest::Approx(17.0 / 18.0).epsilon(1e-12));
        CHECK(w.width == doctest::Approx(17.0 / 9.0).epsilon(1e-12));
        CHECK(w.floor_absorption == doctest::Approx(0.1).epsilon(1e-12));
        CHECK_FALSE(w.formula_valid);
        CHECK(w.formula_width == 0.0);
    }

    SUBCASE("a deeper threshold narrows the window") {
        // Im chi < 1.0 requires |x| < 4/9.
        const WindowReport w = extract_window(p.spec, p.background, 0.0, 0.5);
        REQUIRE(w.found);
        CHECK(w.left_edge == doctest::Approx(-4.0 / 9.0).epsilon(1e-12));
        CHECK(w.right_edge == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
        CHECK(w.width == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    }

    SUBCASE("center snaps to the nearest grid point inside the dip") {
        const WindowReport at_zero =
            extract_window(p.spec, p.background, 0.0, 0.05);
        const WindowReport nearby =
            extract_window(p.spec, p.background, 0.4999, 0.05);
        REQUIRE(nearby.found);
        CHECK(nearby.left_edge == at_zero.left_edge);
        CHECK(nearby.right_edge == at_zero.right_edge);
    }

    SUBCASE("center outside the grid reports no window") {
        const WindowReport w = extract_window(p.spec, p.background, 5.0, 0.05);
        CHECK_FALSE(w.found);
        CHECK(w.width == 0.0);
    }

    SUBCASE("no dip at the center reports no window") {
        const WindowReport w =
            extract_window(p.background, p.background, 0.0, 0.05);
        CHECK_FALSE(w.found);
        CHECK(w.width == 0.0);
    }

    SUBCASE("mismatched grids are rejected") {
        ComplexSpectrum shifted = p.background;
        shifted.grid[5] += 1e-6;
        CHECK_THROWS_AS(extract_window(p.spec, shifted, 0.0, 0.05),
                        InvalidInput);
    }

    SUBCASE("threshold must lie strictly between 0 and 1") {
        CHECK_THROWS_AS(extract_window(p.spec, p.background, 0.0, 0.0),
                        InvalidInput);
        CHECK_THROWS_AS(extract_window(p.spec, p.background, 0.0, 1.0),
                        InvalidInput);
        CHECK_THROWS_AS(extract_window(p.spec, p.background, 0.0, -0.2),
                        InvalidInput);
    }
}

TEST_CASE("counter-propagating window survives Doppler averaging") {
    const LadderScheme s = testsupport::rb_ladder();
    const double g2 = s.gamma2;

    FieldConfig f;
    f.omega_c = 1.5 * g2;
    f.geometry = Geometry::Counter;

    const VaporEnsemble v = testsupport::rb_vapor();
    const QuadratureSpec q = adaptive_quad();
    const auto grid = linspace(-40.0 * g2, 40.0 * g2, 641);

    const LineStack stack = single_line(s);
    const ComplexSpectrum counter = transmission_spectrum(stack, f, v, q, grid);

    FieldConfig f_bg = f;
    f_bg.omega_c = 0.0;
    const ComplexSpectrum background =
        transmission_spectrum(stack, f_bg, v, q, grid);

    FieldConfig f_co = f;
    f_co.geometry = Geometry::Co;
    const ComplexSpectrum co = transmission_spectrum(stack, f_co, v, q, grid);

    SUBCASE("window exists with the expected width and floor") {
        const WindowReport w = extract_window(counter, background, s, f);
        REQUIRE(w.found);
        CHECK(w.formula_valid);
        // 4 Omega_c sqrt(k_p (k_c - k_p)) / k_c at this wavelength pair
        CHECK(w.formula_width ==
              doctest::Approx(2.903882 * g2).epsilon(1e-4));
        // Finite two-photon linewidth and dressed-state wings narrow the
        // extracted window somewhat relative to the analytic estimate.
        CHECK(w.width > 0.6 * w.formula_width);
        CHECK(w.width < 1.4 * w.formula_width);
        // Residual absorption at the two-photon resonance comes from the
        // Lorentzian tails of the dressed states; it is a genuine floor.
        CHECK(w.floor_absorption == doctest::Approx(0.1198).epsilon(0.02));
        CHECK(w.gamma_crossing ==
              doctest::Approx((1.0 - s.k_p() / s.k_c()) * g2).epsilon(1e-12));
        CHECK(w.left_edge < 0.0);
        CHECK(w.right_edge > 0.0);
    }

    SUBCASE("co-propagating beams show no window") {
        const WindowReport w = extract_window(co, background, s, f_co);
        CHECK_FALSE(w.found);
        // Absorption at the two-photon resonance is essentially unchanged.
        CHECK(w.floor_absorption > 0.95);
    }

    SUBCASE("transmission through the cell is strongly nonreciprocal") {
        const std::size_t center = 320;  // delta_p = 0
        REQUIRE(grid[center] == 0.0);
        CHECK(counter.transmission[center] / co.transmission[center] > 5.0);
        // and the co direction tracks the no-control background
        CHECK(co.transmission[center] ==
              doctest::Approx(background.transmission[center]).epsilon(0.05));
    }
}

TEST_CASE("window width grows with control power") {
    const LadderScheme s = testsupport::rb_ladder();
    const double g2 = s.gamma2;

    const VaporEnsemble v = testsupport::rb_vapor();
    const QuadratureSpec q = adaptive_quad();
    const auto grid = linspace(-30.0 * g2, 30.0 * g2, 961);
    const LineStack stack = single_line(s);

    FieldConfig f_bg;
    f_bg.omega_c = 0.0;
    f_bg.geometry = Geometry::Counter;
    const ComplexSpectrum background =
        transmission_spectrum(stack, f_bg, v, q, grid);

    double previous_width = 0.0;
    double previous_floor = 1.0;
    for (double omega : {0.5, 1.0, 2.0, 3.5, 5.0}) {
        FieldConfig f;
        f.omega_c = omega * g2;
        f.geometry = Geometry::Counter;
        const ComplexSpectrum spec =
            transmission_spectrum(stack, f, v, q, grid);
        const WindowReport w = extract_window(spec, background, s, f);
        REQUIRE(w.found);
        CHECK(w.width > previous_width);
        CHECK(w.floor_absorption < previous_floor);
        previous_width = w.width;
        previous_floor = w.floor_absorption;
    }
}

TEST_CASE("wavenumber-ratio sweep compares fit and formula") {
    const LadderScheme s = testsupport::rb_ladder();
    const double g2 = s.gamma2;

    FieldConfig f;
    f.omega_c = 1.5 * g2;
    f.geometry = Geometry::Counter;

    const VaporEnsemble v = testsupport::rb_vapor();
    const QuadratureSpec q = adaptive_quad();

    SUBCASE("rows carry both widths") {
        const std::vector<double> ratios = {1.2, 1.6};
        const auto rows = ratio_sweep(s, f, v, q, ratios);
        REQUIRE(rows.size() == 2);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double r = ratios[i];
            CHECK(rows[i].ratio == r);
            CHECK(rows[i].window_found);
            CHECK(rows[i].formula_width ==
                  doctest::Approx(4.0 * f.omega_c * std::sqrt(r - 1.0) / r)
                      .epsilon(1e-12));
            CHECK(rows[i].fitted_width >
                  0.85 * rows[i].formula_width);
            CHECK(rows[i].fitted_width < rows[i].formula_width);
        }
    }

    SUBCASE("ratios must be positive and ascending") {
        const std::vector<double> descending = {1.6, 1.2};
        CHECK_THROWS_AS(ratio_sweep(s, f, v, q, descending), InvalidInput);
        const std::vector<double> nonpositive = {-1.0, 1.2};
        CHECK_THROWS_AS(ratio_sweep(s, f, v, q, nonpositive), InvalidInput);
    }
}

TEST_CASE("coarse grids trigger a resolution warning") {
    LineStack stack = single_line(testsupport::rb_ladder());
    const double g2 = stack.lines[0].scheme.gamma2;

    FieldConfig f;
    f.omega_c = 1.5 * g2;

    // zero density makes the sweep free; the warning only looks at the grid
    VaporEnsemble v = testsupport::rb_vapor();
    v.density = 0.0;

    QuadratureSpec q;

    std::vector<std::string> warnings;
    transmission_spectrum(stack, f, v, q, linspace(-40.0 * g2, 40.0 * g2, 17),
                          &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("fewer than 8 points") != std::string::npos);

    warnings.clear();
    transmission_spectrum(stack, f, v, q,
                          linspace(-10.0 * g2, 10.0 * g2, 641), &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("spectrum input validation") {
    LineStack stack = single_line(broad_ladder());
    const double g2 = stack.lines[0].scheme.gamma2;
    FieldConfig f;
    f.omega_c = g2;
    VaporEnsemble v = testsupport::rb_vapor();
    QuadratureSpec q;

    SUBCASE("grid must be strictly increasing") {
        const std::vector<double> bad = {0.0, 1.0, 1.0, 2.0};
        CHECK_THROWS_AS(transmission_spectrum(stack, f, v, q, bad),
                        InvalidInput);
    }

    SUBCASE("grid needs at least two points") {
        const std::vector<double> bad = {0.0};
        CHECK_THROWS_AS(transmission_spectrum(stack, f, v, q, bad),
                        InvalidInput);
    }

    SUBCASE("grid values must be finite") {
        const std::vector<double> bad = {
            0.0, std::numeric_limits<double>::quiet_NaN()};
        CHECK_THROWS_AS(transmission_spectrum(stack, f, v, q, bad),
                        InvalidInput);
    }

    SUBCASE("empty stacks are rejected") {
        const LineStack empty;
        CHECK_THROWS_AS(
            transmission_spectrum(empty, f, v, q, linspace(-g2, g2, 4)),
            InvalidInput);
    }

    SUBCASE("a stack with zero total strength is rejected") {
        LineStack zero = stack;
        zero.lines[0].abundance = 0.0;
        CHECK_THROWS_AS(
            transmission_spectrum(zero, f, v, q, linspace(-g2, g2, 4)),
            InvalidInput);
    }

    SUBCASE("negative abundance is rejected") {
        LineStack bad = stack;
        bad.lines[0].abundance = -0.5;
        CHECK_THROWS_AS(
            transmission_spectrum(bad, f, v, q, linspace(-g2, g2, 4)),
            InvalidInput);
    }
}
