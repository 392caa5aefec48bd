#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "latmem/kernel.hpp"

using namespace latmem;

namespace {

// Coefficients of the Raman preset far from the edge, rounded; frozen
// together with the reference values below.
MemoryCoefficients raman_like()
{
    return {1e-3, std::sqrt(1e13), cplx(1.0 / 30e-9, -15.0 / 3e-9), 13.43, cplx(1.0054, -0.00004), 0.0};
}

MemoryCoefficients eit_near_edge_like()
{
    return {1e-3, std::sqrt(30.0 / 30e-9 / 1e-3), cplx(1.0 / 30e-9, 0.0), 12697.0, cplx(0.4232, 0.0019), 0.0};
}

KernelMatrix far_kernel(const char* name, KernelGrids grids = {}, PulseShape shape = PulseShape::gaussian)
{
    Scenario s = preset(name);
    s = s.with_lattice_constant(0.40 * s.lambda_s);
    s.pulse_shape = shape;
    const DerivedParams p = derive_params(s);
    const CellGrid grid(s.a, s.cell_points);
    const Modulation m = modulation(grid, s.a, s.w);
    const BlochMode mode = solve_bloch(potential(m, p, s.L), p.k_s);
    const ModeObservables o = compute_observables(mode, m, s, p);
    return build_kernel(s, p, o, ControlPulse::from_scenario(s), grids);
}

KernelGrids small_grids()
{
    return {60, 120, 5.0};
}

void check_close(cplx got, cplx want, double rel)
{
    INFO("got " << got << ", want " << want);
    CHECK(std::abs(got - want) <= rel * std::abs(want));
}

} // namespace

TEST_CASE("control pulse energy and its inverse")
{
    const double T = 3e-9;
    const ControlPulse g = ControlPulse::gaussian(5.5 / T, T);
    const double quad = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return g.rabi(t) * g.rabi(t); }, -12 * T, 12 * T, 10, 1e-14);
    CHECK(g.total_energy() == doctest::Approx(quad).epsilon(1e-12));
    CHECK(g.integrated(0.0) == doctest::Approx(0.5 * g.total_energy()).epsilon(1e-14));
    CHECK(g.integrated(-5 * T) <= 1e-10 * g.total_energy());
    CHECK(g.total_energy() - g.integrated(5 * T) <= 1e-10 * g.total_energy());
    const double partial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return g.rabi(t) * g.rabi(t); }, -12 * T, 0.7 * T, 10, 1e-14);
    CHECK(g.integrated(0.7 * T) == doctest::Approx(partial).epsilon(1e-12));

    double prev = -1.0;
    for (int i = -60; i <= 60; ++i) {
        const double w = g.integrated(i * T / 10);
        CHECK(w >= prev);
        prev = w;
    }
    for (double f : {1e-9, 0.01, 0.3, 0.5, 0.8, 1 - 1e-9}) {
        const double w = f * g.total_energy();
        CHECK(g.integrated(g.time_at(w)) == doctest::Approx(w).epsilon(1e-10));
    }

    const ControlPulse sq = ControlPulse::square(g.total_energy(), T);
    CHECK(sq.total_energy() == doctest::Approx(g.total_energy()).epsilon(1e-14));
    CHECK(sq.rabi(1.01 * T) == 0.0);
    CHECK(sq.integrated(0.0) == doctest::Approx(0.5 * sq.total_energy()));
    CHECK(sq.time_at(0.25 * sq.total_energy()) == doctest::Approx(-0.5 * T));
    CHECK_THROWS_AS(ControlPulse::gaussian(1.0, 0.0), Error);
    CHECK_THROWS_AS(g.time_at(0.0), Error);
}

TEST_CASE("Gauss-Legendre rule is exact to degree 2n-1")
{
    std::vector<double> x, w;
    for (int n : {1, 2, 5, 16, 200}) {
        gauss_legendre(n, 0.0, 2.0, x, w);
        for (int deg : {0, 1, 2 * n - 1}) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += w[i] * std::pow(x[i] / 2.0, deg);
            CHECK(acc == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
        }
        for (int i = 1; i < n; ++i) CHECK(x[i] > x[i - 1]);
    }
}

TEST_CASE("kernel values against high-precision references")
{
    const MemoryCoefficients c = raman_like();
    const double T = 3e-9, L = c.L;
    KernelMatrix K = build_kernel(c, ControlPulse::gaussian(5.5 / T, T), small_grids());
    check_close(K.value(L / 2, 0.0), {-36169.796115846256435, 84889.666807192236779}, 1e-10);
    check_close(K.value(L / 4, -T), {28992.375597302174286, 27104.530714670884502}, 1e-10);
    check_close(K.value(L, T / 2), {-281778.32176296528094, 114926.1250939587766}, 1e-10);
    check_close(K.value(L / 10, -2 * T), {9403.7286487211031348, 6671.2454741092676399}, 1e-10);

    const KernelMatrix E = build_kernel(eit_near_edge_like(), ControlPulse::gaussian(5.5 / 30e-9, 30e-9), small_grids());
    check_close(E.value(0.7e-3, -10e-9), {-101.45213075989328602, 1444.4788164381621211}, 1e-10);

    const KernelMatrix P = build_kernel(c, ControlPulse::gaussian(5.5 / T, T), small_grids(), KernelForm::printed);
    check_close(P.value(L / 2, 0.0), {2994418.0872336637424, 891427.8222815604567}, 1e-10);
    check_close(P.value(L / 4, -T), {28208.213570223733751, 436415.16553409433333}, 1e-10);
}

TEST_CASE("kernel tails")
{
    const MemoryCoefficients c = raman_like();
    const double T = 3e-9;
    const ControlPulse pulse = ControlPulse::gaussian(5.5 / T, T);
    const KernelMatrix K = build_kernel(c, pulse, small_grids());
    const KernelMatrix P = build_kernel(c, pulse, small_grids(), KernelForm::printed);
    const cplx I(0.0, 1.0);
    for (double z : {0.0, 0.3e-3, 1e-3}) {
        // No control energy left to arrive: only the attenuated source remains.
        const double t = 6 * T;
        check_close(K.value(z, t), I * c.kappa / c.Gamma * pulse.rabi(t) * std::exp(-c.im_k * z), 1e-8);
        // Printed form in its lower tail, where ω ≈ 0.
        const double t0 = -6 * T;
        check_close(P.value(z, t0), c.kappa / c.Gamma * pulse.rabi(t0) * std::exp(-c.im_k * z), 1e-8);
    }
}

TEST_CASE("zero control gives a zero kernel and zero efficiency")
{
    const KernelMatrix K = build_kernel(raman_like(), ControlPulse::zero(3e-9), small_grids());
    CHECK(K.matrix.norm() == 0.0);
    const EfficiencyResult r = optimal_efficiency(K);
    CHECK(r.eta_opt == 0.0);
    CHECK(storage_efficiency(K, Eigen::VectorXcd::Ones(K.tau.size())).eta == 0.0);
}

TEST_CASE("excess walk-off is refused")
{
    MemoryCoefficients c = raman_like();
    c.beta = 0.2 * 3e-9 / c.L;
    CHECK_THROWS_AS(build_kernel(c, ControlPulse::gaussian(5.5 / 3e-9, 3e-9), small_grids()), Error);
    try {
        build_kernel(c, ControlPulse::gaussian(5.5 / 3e-9, 3e-9), small_grids());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::walk_off_too_large);
    }
}

TEST_CASE("rank-one kernel has a single singular value equal to the product of norms")
{
    const KernelMatrix like = build_kernel(raman_like(), ControlPulse::gaussian(5.5 / 3e-9, 3e-9), small_grids());
    std::vector<cplx> f(like.z.size()), g(like.tau.size());
    double nf = 0.0, ng = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = std::polar(1.0 + like.z[i] / like.coeff.L, 3e3 * like.z[i]);
        nf += like.wz[i] * std::norm(f[i]);
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = like.tau[j] / 3e-9;
        g[j] = cplx(std::exp(-x * x), 0.3 * x * std::exp(-x * x)) * 1e4;
        ng += like.wtau[j] * std::norm(g[j]);
    }
    const EfficiencyResult r = optimal_efficiency(build_separable_kernel(like, f, g));
    CHECK(r.eta_opt == doctest::Approx(nf * ng).epsilon(1e-12));
    CHECK(r.sigma[1] < 1e-12 * r.sigma[0]);
}

TEST_CASE("optimal input, null-space input and random inputs")
{
    const KernelMatrix K = far_kernel("raman", small_grids());
    const EfficiencyResult r = optimal_efficiency(K);
    CHECK(r.eta_opt > 0.5);
    CHECK(r.eta_opt <= 1.0);
    CHECK(std::abs(r.sigma_power - r.sigma[0]) <= 1e-9 * r.sigma[0]);
    for (Eigen::Index i = 1; i < r.sigma.size(); ++i) {
        CHECK(r.sigma[i] <= r.sigma[i - 1]);
        CHECK(r.sigma[i] >= 0.0);
    }

    // Unit input norm on the quadrature.
    double norm = 0.0;
    for (std::size_t j = 0; j < K.tau.size(); ++j) norm += K.wtau[j] * std::norm(r.input[j]);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));

    const StorageResult opt = storage_efficiency(K, r.input);
    CHECK(std::abs(opt.eta - r.eta_opt) <= 1e-9);
    CHECK((opt.spin_wave - r.spin_wave).norm() <= 1e-9 * r.spin_wave.norm());

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    const Eigen::Index nt = K.matrix.cols();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(K.matrix, Eigen::ComputeThinV);
    Eigen::VectorXcd v(nt);
    for (auto& x : v) x = cplx(n01(rng), n01(rng));
    for (Eigen::Index k = 0; k < svd.matrixV().cols(); ++k)
        if (svd.singularValues()[k] > 1e-12) v -= svd.matrixV().col(k) * svd.matrixV().col(k).dot(v);
    Eigen::VectorXcd a(nt);
    for (Eigen::Index j = 0; j < nt; ++j) a[j] = v[j] / std::sqrt(K.wtau[j]);
    CHECK(storage_efficiency(K, a).eta <= 1e-20);

    for (int trial = 0; trial < 100; ++trial) {
        for (auto& x : a) x = cplx(n01(rng), n01(rng));
        const double eta = storage_efficiency(K, a).eta;
        CHECK(eta <= r.eta_opt * (1.0 + 1e-12));
        CHECK(eta >= 0.0);
    }

    CHECK_THROWS_AS(storage_efficiency(K, Eigen::VectorXcd::Zero(nt)), Error);
    CHECK_THROWS_AS(storage_efficiency(K, Eigen::VectorXcd::Ones(nt + 1)), Error);
}

TEST_CASE("efficiency depends on control energy, not shape")
{
    for (const char* name : {"raman", "eit"}) {
        const double g = optimal_efficiency(far_kernel(name)).eta_opt;
        const double s = optimal_efficiency(far_kernel(name, {}, PulseShape::square)).eta_opt;
        INFO(name);
        CHECK(s == doctest::Approx(g).epsilon(1e-4));
    }
}

TEST_CASE("efficiency converges under grid doubling")
{
    for (const char* name : {"raman", "eit"}) {
        const double base = optimal_efficiency(far_kernel(name)).eta_opt;
        const double fine = optimal_efficiency(far_kernel(name, {400, 800, 5.0})).eta_opt;
        INFO(name);
        CHECK(fine == doctest::Approx(base).epsilon(1e-3));
    }
}

TEST_CASE("spectral interpolation of an input mode")
{
    const KernelMatrix K = build_kernel(raman_like(), ControlPulse::gaussian(5.5 / 3e-9, 3e-9), small_grids());
    const double E = K.pulse.total_energy();
    auto mode = [&](double t) {
        const double w = K.pulse.integrated(t) / E;
        return K.pulse.rabi(t) * cplx(w * w * w - 0.5 * w, std::sin(3 * w));
    };
    Eigen::VectorXcd a(K.tau.size());
    for (std::size_t j = 0; j < K.tau.size(); ++j) a[j] = mode(K.tau[j]);
    for (double t : {-2.2e-9, -0.3e-9, 0.0, 1.7e-9, 4e-9})
        check_close(K.interpolate_input(a, t), mode(t), 1e-11);
    check_close(K.interpolate_input(a, K.tau[3]), a[3], 1e-12);

    // spin_wave_at reproduces the matrix product on the z nodes.
    const EfficiencyResult r = optimal_efficiency(K);
    for (std::size_t i : {std::size_t(0), std::size_t(17), K.z.size() - 1})
        check_close(K.spin_wave_at(r.input, K.z[i]), r.spin_wave[i], 1e-10);
}

TEST_CASE("export formats")
{
    const KernelMatrix K = build_kernel(raman_like(), ControlPulse::gaussian(5.5 / 3e-9, 3e-9), {10, 20, 5.0});
    const EfficiencyResult r = optimal_efficiency(K);
    const std::string in = input_mode_csv(K, r), sw = spin_wave_csv(K, r);
    CHECK(in.rfind("tau_ns,re_Ain,im_Ain\n", 0) == 0);
    CHECK(sw.rfind("z_um,re_Bout,im_Bout\n", 0) == 0);
    CHECK(std::count(in.begin(), in.end(), '\n') == 21);
    CHECK(std::count(sw.begin(), sw.end(), '\n') == 11);
    const auto j = nlohmann::json::parse(efficiency_json(r));
    CHECK(j["eta_opt"].get<double>() == doctest::Approx(r.eta_opt));
    CHECK(j["sigma"].size() == 10);
}
