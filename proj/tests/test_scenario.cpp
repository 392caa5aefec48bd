#include <doctest.h>

#include <cmath>

#include "latmem/scenario.hpp"

using namespace latmem;

TEST_CASE("presets carry the stated protocol parameters")
{
    const Scenario r = preset("raman");
    CHECK(r.d == 300.0);
    CHECK(r.T == doctest::Approx(3e-9));
    CHECK(r.delta == doctest::Approx(15.0 / 3e-9));
    CHECK(r.omega0 * r.T == doctest::Approx(5.5));
    CHECK(r.a == doctest::Approx(320e-9));
    CHECK(r.w == doctest::Approx(32e-9));

    const Scenario e = preset("eit");
    CHECK(e.d == 30.0);
    CHECK(e.T == doctest::Approx(30e-9));
    CHECK(e.delta == 0.0);
    CHECK_THROWS_AS(preset("lambda"), Error);
}

TEST_CASE("derived parameters")
{
    const DerivedParams r = derive_params(preset("raman"));
    CHECK(r.Gamma.real() == doctest::Approx(1.0 / 30e-9));
    CHECK(r.Gamma.imag() == doctest::Approx(-5e9));
    CHECK(r.kappa * r.kappa == doctest::Approx(1e13).epsilon(1e-14));
    CHECK(r.kappa * r.kappa * 1e-3 == doctest::Approx(r.d_gamma).epsilon(1e-15));
    CHECK(r.k_s == doctest::Approx(2 * pi / 800e-9));
    CHECK(r.n_cells == 3125);

    const DerivedParams e = derive_params(preset("eit"));
    CHECK(e.Gamma.imag() == 0.0);
    CHECK(e.d_gamma_T == doctest::Approx(30.0));
}

TEST_CASE("validation rejects broken scenarios and warns on weak adiabaticity")
{
    Scenario s = preset("eit");
    CHECK(s.validate().empty());

    Scenario bad = s;
    bad.w = s.a / 2;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = s;
    bad.L = 5 * s.a;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = s;
    bad.delta = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = s;
    bad.gamma = std::nan("");
    CHECK_THROWS_AS(derive_params(bad), Error);
    bad = s;
    bad.cell_points = 255;
    CHECK_THROWS_AS(bad.validate(), Error);

    Scenario weak = s;
    weak.d = 5.0;
    const auto warnings = weak.validate();
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("adiabaticity") != std::string::npos);
}

TEST_CASE("scenario JSON round trip and schema errors")
{
    Scenario s = preset("raman");
    s.pulse_shape = PulseShape::square;
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(back.lambda_s == doctest::Approx(s.lambda_s));
    CHECK(back.delta == doctest::Approx(s.delta));
    CHECK(back.w == doctest::Approx(s.w));
    CHECK(back.pulse_shape == PulseShape::square);
    CHECK(back.cell_points == s.cell_points);

    std::string text = scenario_to_json(s);
    CHECK_THROWS_AS(scenario_from_json(text.substr(0, text.size() - 1) + ", \"extra\": 1}"), Error);
    const auto pos = text.find("\"d\"");
    std::string missing = text;
    missing.replace(pos, text.find(',', pos) - pos + 1, "");
    CHECK_THROWS_AS(scenario_from_json(missing), Error);
    CHECK_THROWS_AS(scenario_from_json("[1, 2]"), Error);
}

TEST_CASE("with_lattice_constant keeps w/a")
{
    const Scenario s = preset("raman").with_lattice_constant(400e-9);
    CHECK(s.a == 400e-9);
    CHECK(s.w / s.a == doctest::Approx(0.1));
}

TEST_CASE("modulation: normalisation, positivity, periodicity")
{
    for (double a : {320e-9, 400e-9}) {
        for (int n : {256, 1024}) {
            const CellGrid grid(a, n);
            const Modulation m = modulation(grid, a, a / 10);
            CHECK(grid.integrate(m.m) / a == doctest::Approx(1.0).epsilon(1e-10));
            for (double v : m.m) CHECK(v >= 0.0);
            // Sample symmetry about a/2 (the periodic image of z_j is a − z_j).
            for (int j = 1; j < n; ++j) CHECK(m.m[j] == doctest::Approx(m.m[n - j]).epsilon(1e-13));
        }
    }
    const CellGrid grid(400e-9, 512);
    CHECK_THROWS_AS(modulation(grid, 400e-9, 200e-9), Error);
}

TEST_CASE("modulation peak matches direct quadrature of the periodised Gaussian")
{
    // Independent oracle: normalisation from a 10^4-point midpoint rule.
    const double a = 400e-9, w = 40e-9;
    auto raw = [&](double z) {
        double acc = 0.0;
        for (int n = -3; n <= 3; ++n) acc += std::exp(-std::pow((z - a / 2 - n * a) / w, 2));
        return acc;
    };
    double mean = 0.0;
    const int N = 10000;
    for (int i = 0; i < N; ++i) mean += raw((i + 0.5) * a / N) / N;
    const double oracle_peak = raw(a / 2) / mean;
    CHECK(oracle_peak == doctest::Approx(5.641895835477563).epsilon(1e-12));

    const CellGrid grid(a, 1024);
    const Modulation m = modulation(grid, a, w);
    CHECK(m.m[512] == doctest::Approx(oracle_peak).epsilon(1e-10));
}

TEST_CASE("wide Gaussian tends to the flat modulation")
{
    const CellGrid grid(400e-9, 256);
    const auto m = periodized_gaussian(grid, 100 * 400e-9);
    for (double v : m) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("potential examples")
{
    Scenario s = preset("eit");
    const DerivedParams p = derive_params(s);
    const CellGrid grid(s.a, 512);

    const Potential flat = potential(Modulation::uniform(grid), p, s.L);
    const cplx expected = 1.0 + cplx(0.0, 2.0) * s.d / (s.L * p.k_s);
    double lo = 1e300, hi = -1e300;
    for (const cplx& v : flat.v) {
        CHECK(std::abs(v - expected) <= 1e-15);
        lo = std::min(lo, v.imag());
        hi = std::max(hi, v.imag());
    }
    CHECK(hi - lo <= 1e-14 * std::abs(expected));

    const Potential vac = potential(Modulation{grid, std::vector<double>(512, 0.0)}, p, s.L);
    for (const cplx& v : vac.v) CHECK(v == cplx(1.0, 0.0));

    const Scenario r = preset("raman");
    const DerivedParams pr = derive_params(r);
    const CellGrid rg(r.a, 512);
    const Modulation m = modulation(rg, r.a, r.w);
    const Potential V = potential(m, pr, r.L);
    const cplx site = 1.0 + cplx(0.0, 2.0) * r.d * r.gamma * m.m[256] / (cplx(r.gamma, -r.delta) * r.L * pr.k_s);
    CHECK(std::abs(V.v[256] - site) <= 1e-14);
    CHECK(V.v[256].real() < 1.0);

    Scenario r2 = r;
    r2.d *= 2;
    const Potential V2 = potential(m, derive_params(r2), r.L);
    for (int j = 0; j < 512; ++j)
        CHECK((V2.v[j] - 1.0).imag() == doctest::Approx(2.0 * (V.v[j] - 1.0).imag()).epsilon(1e-14));
}

TEST_CASE("cell grid Simpson weights integrate trigonometric polynomials")
{
    const double a = 1.0;
    const CellGrid grid(a, 256);
    std::vector<double> f(256);
    for (int j = 0; j < 256; ++j) f[j] = 2.0 + std::cos(2 * pi * 3 * grid.z(j)) + std::sin(2 * pi * grid.z(j));
    CHECK(grid.integrate(f) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(CellGrid(a, 255), Error);
}
