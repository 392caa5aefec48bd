#include "latmem/bloch.hpp"
#include "latmem/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include <boost/numeric/odeint.hpp>

namespace latmem {

namespace odeint = boost::numeric::odeint;

PeriodicSpline::PeriodicSpline(double period, std::vector<cplx> samples)
    : period_(period), y_(std::move(samples))
{
    const int n = static_cast<int>(y_.size());
    if (n < 4) throw Error(ErrorKind::invalid_input, "periodic spline needs at least 4 samples");
    h_ = period_ / n;

    // Cyclic tridiagonal system m[j-1] + 4 m[j] + m[j+1] = 6 (y[j+1] - 2 y[j] + y[j-1]) / h^2,
    // solved with the Sherman-Morrison correction on top of a Thomas sweep.
    std::vector<cplx> rhs(n);
    for (int j = 0; j < n; ++j) {
        const cplx prev = y_[(j + n - 1) % n];
        const cplx next = y_[(j + 1) % n];
        rhs[j] = 6.0 * (next - 2.0 * y_[j] + prev) / (h_ * h_);
    }

    const double gamma = -4.0;
    std::vector<double> diag(n, 4.0);
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;

    auto thomas = [&](std::vector<cplx> r) {
        std::vector<double> c(n);
        std::vector<cplx> x(n);
        c[0] = 1.0 / diag[0];
        r[0] /= diag[0];
        for (int j = 1; j < n; ++j) {
            const double denom = diag[j] - c[j - 1];
            c[j] = 1.0 / denom;
            r[j] = (r[j] - r[j - 1]) / denom;
        }
        x[n - 1] = r[n - 1];
        for (int j = n - 2; j >= 0; --j) x[j] = r[j] - c[j] * x[j + 1];
        return x;
    };

    std::vector<cplx> corr(n, 0.0);
    corr[0] = gamma;
    corr[n - 1] = 1.0;
    const std::vector<cplx> x = thomas(rhs);
    const std::vector<cplx> q = thomas(corr);
    const cplx fact = (x[0] + x[n - 1] / gamma) / (1.0 + q[0] + q[n - 1] / gamma);
    m_.resize(n);
    for (int j = 0; j < n; ++j) m_[j] = x[j] - fact * q[j];
}

cplx PeriodicSpline::operator()(double z) const
{
    const int n = static_cast<int>(y_.size());
    double s = std::fmod(z, period_);
    if (s < 0) s += period_;
    int j = static_cast<int>(s / h_);
    if (j >= n) j = n - 1;
    const double t = s / h_ - j;
    const int j1 = (j + 1) % n;
    const double u = 1.0 - t;
    return u * y_[j] + t * y_[j1] + (h_ * h_ / 6.0) * ((u * u * u - u) * m_[j] + (t * t * t - t) * m_[j1]);
}

namespace {

using State = std::array<cplx, 4>;

struct CarrierSystem {
    const PeriodicSpline* v;
    double k_s;

    void operator()(const State& y, State& dy, double z) const
    {
        const cplx kv = -k_s * (*v)(z);
        dy[0] = k_s * y[1];
        dy[1] = kv * y[0];
        dy[2] = k_s * y[3];
        dy[3] = kv * y[2];
    }
};

Eigen::Matrix2cd to_matrix(const State& y)
{
    Eigen::Matrix2cd m;
    m << y[0], y[2], y[1], y[3];
    return m;
}

FundamentalSystem integrate_samples(const CellGrid& grid, std::vector<cplx> samples, double k_s, double tol)
{
    if (!(tol > 0)) throw Error(ErrorKind::invalid_input, "integrator tolerance must be positive");
    const double a = grid.period();
    const PeriodicSpline spline(a, std::move(samples));
    CarrierSystem sys{&spline, k_s};

    std::vector<double> times(grid.size() + 1);
    for (int j = 0; j < grid.size(); ++j) times[j] = grid.z(j);
    times.back() = a;

    FundamentalSystem out;
    out.at_grid.reserve(grid.size());
    double last_z = 0.0;
    auto observer = [&](const State& y, double z) {
        last_z = z;
        if (static_cast<int>(out.at_grid.size()) < grid.size())
            out.at_grid.push_back(to_matrix(y));
        else
            out.at_end = to_matrix(y);
    };

    State y{1.0, 0.0, 0.0, 1.0};
    const double err = 1e-2 * tol;
    auto stepper = odeint::make_controlled(err, err, odeint::runge_kutta_fehlberg78<State>());
    try {
        odeint::integrate_times(stepper, sys, y, times.begin(), times.end(), grid.spacing(), observer,
                                odeint::max_step_checker(100000));
    } catch (const std::runtime_error& e) {
        std::ostringstream os;
        os << "carrier integration failed near z = " << last_z << " m (" << e.what() << ")";
        throw Error(ErrorKind::integration_failure, os.str());
    }
    if (static_cast<int>(out.at_grid.size()) != grid.size())
        throw Error(ErrorKind::integration_failure, "integrator did not reach the cell end");
    return out;
}

// Eigenvector of a 2x2 matrix for a known eigenvalue; picks the better
// conditioned of the two row-derived candidates.
Eigen::Vector2cd eigenvector(const Eigen::Matrix2cd& m, cplx lambda)
{
    Eigen::Vector2cd v1(m(0, 1), lambda - m(0, 0));
    Eigen::Vector2cd v2(lambda - m(1, 1), m(1, 0));
    Eigen::Vector2cd v = v1.norm() >= v2.norm() ? v1 : v2;
    if (v.norm() == 0.0) v = Eigen::Vector2cd(1.0, 0.0); // M = λI
    return v / v.norm();
}

} // namespace

FundamentalSystem integrate_cell(const Potential& V, double k_s, double tol)
{
    return integrate_samples(V.grid, V.v, k_s, tol);
}

Monodromy monodromy(const Potential& V, double k_s, double tol)
{
    Monodromy out;
    out.tol = tol;
    out.matrix = integrate_cell(V, k_s, tol).at_end;

    std::vector<cplx> lossless(V.v.size());
    for (std::size_t j = 0; j < V.v.size(); ++j) lossless[j] = V.v[j].real();
    out.lossless_trace = integrate_samples(V.grid, std::move(lossless), k_s, tol).at_end.trace().real();
    return out;
}

CrystalMomentum crystal_momentum(const Monodromy& m, double a)
{
    const cplx half_tr = 0.5 * m.trace();
    const cplx det = m.det();
    const cplx root = std::sqrt(half_tr * half_tr - det);
    const cplx l1 = half_tr + root;
    const cplx l2 = half_tr - root;
    if (std::abs(l1 - l2) < 1e-8 * std::max(1.0, std::abs(l1)))
        throw Error(ErrorKind::band_edge_degeneracy, "monodromy is defective (exact band-edge degeneracy)");

    CrystalMomentum cm;
    const double diff = std::abs(l1) - std::abs(l2);
    if (std::abs(diff) <= 1e-12) {
        // Lossless propagating band: both |λ| = 1, take Re k >= 0.
        cm.lambda_fwd = std::arg(l1) >= 0 ? l1 : l2;
    } else {
        cm.lambda_fwd = diff < 0 ? l1 : l2;
    }
    cm.lambda_bwd = cm.lambda_fwd == l1 ? l2 : l1;
    cm.k = cplx(0.0, -1.0) * std::log(cm.lambda_fwd) / a;
    cm.in_gap = std::abs(m.lossless_trace) > 2.0;
    return cm;
}

BlochMode bloch_mode(const Potential& V, double k_s, const CrystalMomentum& cm, double tol)
{
    const CellGrid& grid = V.grid;
    const int n = grid.size();
    const double a = grid.period();
    const FundamentalSystem fs = integrate_cell(V, k_s, tol);

    const Eigen::Vector2cd vf = eigenvector(fs.at_end, cm.lambda_fwd);
    const Eigen::Vector2cd vb = eigenvector(fs.at_end, cm.lambda_bwd);

    BlochMode mode{.grid = grid};
    mode.k_s = k_s;
    mode.k = cm.k;
    mode.im_k = cm.k.imag();
    mode.in_gap = cm.in_gap;
    mode.phi.resize(n);
    mode.dphi.resize(n);
    mode.u.resize(n);
    mode.psi.resize(n);

    const cplx I(0.0, 1.0);
    const double re_k = cm.k.real();
    const double im_k = cm.k.imag();

    std::vector<cplx> chi(n);
    for (int j = 0; j < n; ++j) {
        const double z = grid.z(j);
        const Eigen::Vector2cd f = fs.at_grid[j] * vf;
        const Eigen::Vector2cd b = fs.at_grid[j] * vb;
        const double strip = std::exp(im_k * z);
        mode.phi[j] = f(0) * strip;
        mode.dphi[j] = (k_s * f(1) + im_k * f(0)) * strip;
        mode.u[j] = mode.phi[j] * std::exp(-I * re_k * z);
        chi[j] = V.v[j] * b(0) / strip;
    }

    // Fix the arbitrary scale of φ: unit mean |u|², real positive mean of u.
    std::vector<cplx> u2(n);
    for (int j = 0; j < n; ++j) u2[j] = std::norm(mode.u[j]);
    const double mean_sq = grid.integrate(u2).real() / a;
    cplx scale = 1.0 / std::sqrt(mean_sq);
    const cplx mean_u = grid.integrate(mode.u) / a;
    if (std::abs(mean_u) > 1e-12) scale *= std::conj(mean_u) / std::abs(mean_u);
    for (int j = 0; j < n; ++j) {
        mode.phi[j] *= scale;
        mode.dphi[j] *= scale;
        mode.u[j] *= scale;
    }

    std::vector<cplx> pair(n);
    double chi_sq = 0.0;
    for (int j = 0; j < n; ++j) {
        pair[j] = chi[j] * mode.phi[j];
        chi_sq += std::norm(chi[j]);
    }
    const cplx overlap = grid.integrate(pair);
    const double ref = std::sqrt(chi_sq / n) * a;
    if (std::abs(overlap) < 1e-12 * ref)
        throw Error(ErrorKind::mode_orthogonality, "conjugate pairing vanishes (exact band-edge degeneracy)");
    for (int j = 0; j < n; ++j) mode.psi[j] = chi[j] / overlap;

    // u'(0) from φ_full'(0) − i k φ_full(0); the stripping factor is 1 at z = 0.
    const Eigen::Vector2cd f0 = fs.at_grid[0] * vf;
    mode.u0 = mode.u[0];
    mode.du0 = (k_s * f0(1) - I * cm.k * f0(0)) * scale;

    const Eigen::Vector2cd fa = fs.at_end * vf;
    const cplx u_end = fa(0) * scale * std::exp(-I * cm.k * a);
    double max_u = 0.0;
    for (const cplx& x : mode.u) max_u = std::max(max_u, std::abs(x));
    mode.periodicity_error = std::abs(u_end - mode.u0) / max_u;
    return mode;
}

BlochMode solve_bloch(const Potential& V, double k_s, double tol)
{
    const CrystalMomentum cm = crystal_momentum(monodromy(V, k_s, tol), V.grid.period());
    return bloch_mode(V, k_s, cm, tol);
}

namespace {

struct RawPoint {
    cplx k;
    bool in_gap;
};

std::vector<BandPoint> assign_bands(const std::vector<RawPoint>& raw, std::span<const double> k_s_values,
                                    double a, double n_eff)
{
    std::vector<BandPoint> out;
    out.reserve(raw.size());
    const double G = 2.0 * pi / a;
    double prev_ext = 0.0;
    double prev_ks = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double ks = k_s_values[i];
        const double kr = raw[i].k.real();
        const double estimate = i == 0 ? ks * n_eff : prev_ext * ks / prev_ks;
        double best = kr;
        double best_dist = std::abs(kr - estimate);
        const int nmax = static_cast<int>(std::ceil(std::abs(estimate) / G)) + 2;
        for (int n = -nmax; n <= nmax; ++n) {
            for (double sign : {1.0, -1.0}) {
                const double cand = sign * kr + n * G;
                const double dist = std::abs(cand - estimate);
                if (dist < best_dist) {
                    best = cand;
                    best_dist = dist;
                }
            }
        }
        prev_ext = best;
        prev_ks = ks;
        const int band = std::max(1, static_cast<int>(std::floor(std::abs(best) * a / pi - 1e-9)) + 1);
        out.push_back(BandPoint{ks, std::abs(kr), raw[i].k.imag(), band, raw[i].in_gap});
    }
    return out;
}

void check_monotone(std::span<const double> k_s_values)
{
    if (k_s_values.empty()) throw Error(ErrorKind::invalid_input, "band scan needs at least one point");
    for (std::size_t i = 1; i < k_s_values.size(); ++i)
        if (!(k_s_values[i] > k_s_values[i - 1]))
            throw Error(ErrorKind::invalid_input, "band scan k_s values must be strictly increasing");
}

std::vector<BandPoint> scan(const Scenario& s, std::span<const double> k_s_values, int workers, bool empty)
{
    check_monotone(k_s_values);
    s.validate();
    const CellGrid grid(s.a, s.cell_points);
    const Modulation m = empty ? Modulation{grid, std::vector<double>(grid.size(), 0.0)}
                               : modulation(grid, s.a, s.w);

    std::vector<RawPoint> raw(k_s_values.size());
    double n_eff = 1.0;
    parallel_for(k_s_values.size(), workers, [&](std::size_t i) {
        Scenario si = s;
        si.lambda_s = 2.0 * pi / k_s_values[i];
        const DerivedParams p = derive_params(si);
        const Potential V = potential(m, p, si.L);
        try {
            const CrystalMomentum cm = crystal_momentum(monodromy(V, p.k_s), s.a);
            raw[i] = RawPoint{cm.k, cm.in_gap};
        } catch (const Error& e) {
            std::ostringstream os;
            os << e.what() << " at k_s = " << k_s_values[i] << " 1/m";
            throw Error(e.kind(), os.str());
        }
    });
    {
        Scenario s0 = s;
        s0.lambda_s = 2.0 * pi / k_s_values[0];
        const Potential V0 = potential(m, derive_params(s0), s0.L);
        n_eff = std::sqrt(std::abs(grid.integrate(V0.v).real() / s.a));
    }
    return assign_bands(raw, k_s_values, s.a, n_eff);
}

} // namespace

std::vector<BandPoint> band_scan(const Scenario& s, std::span<const double> k_s_values, int workers)
{
    return scan(s, k_s_values, workers, false);
}

std::vector<BandPoint> band_scan_empty(const Scenario& s, std::span<const double> k_s_values)
{
    return scan(s, k_s_values, 1, true);
}

std::string band_csv(std::span<const BandPoint> points)
{
    std::ostringstream os;
    os << "k_s_per_m,re_k_per_m,im_k_per_m,band_index,in_gap\n";
    os << std::setprecision(17);
    for (const BandPoint& p : points)
        os << p.k_s << ',' << p.re_k << ',' << p.im_k << ',' << p.band_index << ',' << (p.in_gap ? 1 : 0) << '\n';
    return os.str();
}

} // namespace latmem
