#include "latmem/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>
#include <nlohmann/json.hpp>

#include "latmem/bessel.hpp"

namespace latmem {

namespace {

constexpr double sqrt2 = 1.41421356237309504880;

} // namespace

ControlPulse ControlPulse::gaussian(double omega0, double T)
{
    if (!(omega0 >= 0) || !(T > 0)) throw Error(ErrorKind::invalid_input, "gaussian pulse needs omega0 >= 0, T > 0");
    return ControlPulse(PulseShape::gaussian, omega0, T);
}

ControlPulse ControlPulse::square(double energy, double T)
{
    if (!(energy >= 0) || !(T > 0)) throw Error(ErrorKind::invalid_input, "square pulse needs energy >= 0, T > 0");
    return ControlPulse(PulseShape::square, std::sqrt(energy / (2.0 * T)), T);
}

ControlPulse ControlPulse::zero(double T)
{
    return ControlPulse(PulseShape::gaussian, 0.0, T);
}

ControlPulse ControlPulse::from_scenario(const Scenario& s)
{
    const ControlPulse g = gaussian(s.omega0, s.T);
    if (s.pulse_shape == PulseShape::gaussian) return g;
    return square(g.total_energy(), s.T);
}

double ControlPulse::rabi(double tau) const
{
    if (shape_ == PulseShape::gaussian) {
        const double x = tau / T_;
        return amp_ * std::exp(-x * x);
    }
    return std::abs(tau) <= T_ ? amp_ : 0.0;
}

double ControlPulse::total_energy() const
{
    if (shape_ == PulseShape::gaussian) return amp_ * amp_ * T_ * std::sqrt(pi / 2.0);
    return 2.0 * T_ * amp_ * amp_;
}

double ControlPulse::integrated(double tau) const
{
    const double E = total_energy();
    if (shape_ == PulseShape::gaussian) {
        const double x = sqrt2 * tau / T_;
        return x < 0 ? 0.5 * E * std::erfc(-x) : E * (1.0 - 0.5 * std::erfc(x));
    }
    return amp_ * amp_ * std::clamp(tau + T_, 0.0, 2.0 * T_);
}

double ControlPulse::time_at(double omega) const
{
    const double E = total_energy();
    if (!(omega > 0 && omega < E)) throw Error(ErrorKind::invalid_input, "time_at: omega outside (0, E)");
    if (shape_ == PulseShape::gaussian) {
        const double scale = T_ / sqrt2;
        if (omega <= 0.5 * E) return -scale * boost::math::erfc_inv(2.0 * omega / E);
        return scale * boost::math::erfc_inv(2.0 * (E - omega) / E);
    }
    return omega / (amp_ * amp_) - T_;
}

double integrated_rabi(const ControlPulse& pulse, double tau)
{
    return pulse.integrated(tau);
}

void gauss_legendre(int n, double lo, double hi, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (n < 1) throw Error(ErrorKind::invalid_input, "gauss_legendre needs n >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = mid + half * x;
        nodes[i] = mid - half * x;
        weights[i] = weights[n - 1 - i] = half * w;
    }
}

MemoryCoefficients MemoryCoefficients::from(const Scenario& s, const DerivedParams& p, const ModeObservables& o)
{
    return MemoryCoefficients{s.L, p.kappa, p.Gamma, o.im_k, o.alpha * speed_of_light / o.v_g, o.beta};
}

cplx KernelMatrix::value(double z, double t) const
{
    const double omega = pulse.rabi(t);
    if (omega == 0.0) return 0.0;
    const cplx I(0.0, 1.0);
    const cplx G = coeff.Gamma;
    if (form == KernelForm::printed) {
        const double w = pulse.integrated(t);
        const cplx arg = 2.0 * coeff.kappa * std::sqrt(coeff.coupling * z * w) / G;
        const cplx expo = -coeff.im_k * z - w / G + std::abs(arg.imag());
        return coeff.kappa / G * omega * std::exp(expo) * bessel_j0_scaled(arg);
    }
    const double remaining = std::max(0.0, pulse.total_energy() - pulse.integrated(t));
    const cplx x = coeff.coupling * coeff.kappa * coeff.kappa * z * remaining / (G * G);
    const cplx arg = 2.0 * I * std::sqrt(x);
    const cplx expo = -coeff.im_k * z - remaining / G + std::abs(arg.imag());
    return I * coeff.kappa / G * omega * std::exp(expo) * bessel_j0_scaled(arg);
}

cplx KernelMatrix::interpolate_input(const Eigen::VectorXcd& a_nodes, double t) const
{
    const double omega = pulse.rabi(t);
    if (omega == 0.0) return 0.0;
    const double w = pulse.integrated(t);
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < omega_nodes.size(); ++j) {
        const cplx value = a_nodes[j] / pulse.rabi(tau[j]);
        const double diff = w - omega_nodes[j];
        if (diff == 0.0) return omega * value;
        const double c = omega_bary[j] / diff;
        num += c * value;
        den += c;
    }
    return omega * num / den;
}

cplx KernelMatrix::spin_wave_at(const Eigen::VectorXcd& a_nodes, double z) const
{
    cplx acc = 0.0;
    for (std::size_t j = 0; j < tau.size(); ++j) acc += value(z, tau[j]) * wtau[j] * a_nodes[j];
    return acc;
}

KernelMatrix build_kernel(const MemoryCoefficients& coeff, const ControlPulse& pulse, const KernelGrids& grids,
                          KernelForm form)
{
    if (grids.z_points < 2 || grids.tau_points < 2)
        throw Error(ErrorKind::invalid_input, "kernel grids need at least 2 points");
    const double T = pulse.duration();
    if (std::abs(coeff.beta) * coeff.L > T / 10.0) {
        std::ostringstream os;
        os << "beta*L/T = " << std::abs(coeff.beta) * coeff.L / T
           << " exceeds 0.1; use the propagation solver, which keeps walk-off";
        throw Error(ErrorKind::walk_off_too_large, os.str());
    }

    KernelMatrix K{coeff, pulse, form};
    gauss_legendre(grids.z_points, 0.0, coeff.L, K.z, K.wz);

    const double t_lo = -grids.window * T, t_hi = grids.window * T;
    const double w_lo = pulse.integrated(t_lo), w_hi = pulse.integrated(t_hi);
    const int n = grids.tau_points;
    if (w_hi - w_lo <= 0.0) {
        // No control energy in the window: plain Gauss–Legendre in τ, K ≡ 0.
        gauss_legendre(n, t_lo, t_hi, K.tau, K.wtau);
        K.omega_nodes.assign(n, 0.0);
        K.omega_bary.assign(n, 0.0);
        K.matrix = Eigen::MatrixXcd::Zero(grids.z_points, n);
        return K;
    }

    std::vector<double> wq;
    gauss_legendre(n, w_lo, w_hi, K.omega_nodes, wq);
    K.tau.resize(n);
    K.wtau.resize(n);
    K.omega_bary.resize(n);
    const double mid = 0.5 * (w_hi + w_lo), half = 0.5 * (w_hi - w_lo);
    for (int j = 0; j < n; ++j) {
        K.tau[j] = pulse.time_at(K.omega_nodes[j]);
        const double om = pulse.rabi(K.tau[j]);
        K.wtau[j] = wq[j] / (om * om);
        const double x = (K.omega_nodes[j] - mid) / half;
        K.omega_bary[j] = (j % 2 == 0 ? 1.0 : -1.0) * std::sqrt((1.0 - x * x) * wq[j] / half);
    }

    K.matrix.resize(grids.z_points, n);
    for (int i = 0; i < grids.z_points; ++i) {
        const double sz = std::sqrt(K.wz[i]);
        for (int j = 0; j < n; ++j) K.matrix(i, j) = sz * K.value(K.z[i], K.tau[j]) * std::sqrt(K.wtau[j]);
    }
    return K;
}

KernelMatrix build_kernel(const Scenario& s, const DerivedParams& p, const ModeObservables& obs,
                          const ControlPulse& pulse, const KernelGrids& grids)
{
    return build_kernel(MemoryCoefficients::from(s, p, obs), pulse, grids);
}

KernelMatrix build_separable_kernel(const KernelMatrix& like, const std::vector<cplx>& f_z,
                                    const std::vector<cplx>& g_tau)
{
    if (f_z.size() != like.z.size() || g_tau.size() != like.tau.size())
        throw Error(ErrorKind::invalid_input, "separable kernel factors do not match the grids");
    KernelMatrix K = like;
    for (std::size_t i = 0; i < f_z.size(); ++i)
        for (std::size_t j = 0; j < g_tau.size(); ++j)
            K.matrix(i, j) = std::sqrt(like.wz[i]) * f_z[i] * g_tau[j] * std::sqrt(like.wtau[j]);
    return K;
}

EfficiencyResult optimal_efficiency(const KernelMatrix& K)
{
    if (K.matrix.rows() != static_cast<Eigen::Index>(K.z.size()) ||
        K.matrix.cols() != static_cast<Eigen::Index>(K.tau.size()))
        throw Error(ErrorKind::invalid_input, "kernel matrix does not match its grids");

    EfficiencyResult r;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(K.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    r.sigma = svd.singularValues();
    const double smax = r.sigma.size() > 0 ? r.sigma[0] : 0.0;
    r.eta_opt = smax * smax;

    const Eigen::Index nt = K.matrix.cols();
    Eigen::VectorXcd v = svd.matrixV().col(0);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (std::abs(v[big]) > 0) v *= std::conj(v[big]) / std::abs(v[big]);
    r.input.resize(nt);
    for (Eigen::Index j = 0; j < nt; ++j) r.input[j] = v[j] / std::sqrt(K.wtau[j]);
    const Eigen::VectorXcd kv = K.matrix * v;
    r.spin_wave.resize(kv.size());
    for (Eigen::Index i = 0; i < kv.size(); ++i) r.spin_wave[i] = kv[i] / std::sqrt(K.wz[i]);

    // Independent route: power iteration on the Gram operator K̃ᴴK̃.
    const Eigen::MatrixXcd gram = K.matrix.adjoint() * K.matrix;
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(nt) / std::sqrt(double(nt));
    double lambda = 0.0;
    int it = 0;
    for (; it < 10000; ++it) {
        const Eigen::VectorXcd y = gram * x;
        const double next = y.norm();
        if (next == 0.0) {
            lambda = 0.0;
            break;
        }
        x = y / next;
        const bool done = std::abs(next - lambda) <= 1e-13 * next;
        lambda = next;
        if (done) break;
    }
    if (it == 10000) throw Error(ErrorKind::numerical_failure, "power iteration did not converge");
    r.sigma_power = std::sqrt(lambda);
    r.power_iterations = it + 1;
    if (std::abs(r.sigma_power - smax) > 1e-9 * std::max(smax, 1e-300))
        throw Error(ErrorKind::numerical_failure, "SVD and power iteration disagree on sigma_max");
    return r;
}

StorageResult storage_efficiency(const KernelMatrix& K, const Eigen::VectorXcd& a_in)
{
    const Eigen::Index nt = K.matrix.cols();
    if (a_in.size() != nt) throw Error(ErrorKind::invalid_input, "input mode length does not match the τ grid");
    Eigen::VectorXcd v(nt);
    for (Eigen::Index j = 0; j < nt; ++j) v[j] = std::sqrt(K.wtau[j]) * a_in[j];
    const double in_norm = v.squaredNorm();
    if (!(in_norm > 0)) throw Error(ErrorKind::invalid_input, "input mode has zero norm");
    const Eigen::VectorXcd kv = K.matrix * v;
    StorageResult r;
    r.spin_wave.resize(kv.size());
    for (Eigen::Index i = 0; i < kv.size(); ++i) r.spin_wave[i] = kv[i] / std::sqrt(K.wz[i]);
    r.eta = kv.squaredNorm() / in_norm;
    return r;
}

std::string input_mode_csv(const KernelMatrix& K, const EfficiencyResult& r)
{
    std::ostringstream os;
    os << std::setprecision(17) << "tau_ns,re_Ain,im_Ain\n";
    for (std::size_t j = 0; j < K.tau.size(); ++j)
        os << K.tau[j] * 1e9 << ',' << r.input[j].real() << ',' << r.input[j].imag() << '\n';
    return os.str();
}

std::string spin_wave_csv(const KernelMatrix& K, const EfficiencyResult& r)
{
    std::ostringstream os;
    os << std::setprecision(17) << "z_um,re_Bout,im_Bout\n";
    for (std::size_t i = 0; i < K.z.size(); ++i)
        os << K.z[i] * 1e6 << ',' << r.spin_wave[i].real() << ',' << r.spin_wave[i].imag() << '\n';
    return os.str();
}

std::string efficiency_json(const EfficiencyResult& r)
{
    nlohmann::json j;
    j["eta_opt"] = r.eta_opt;
    std::vector<double> s(r.sigma.data(), r.sigma.data() + r.sigma.size());
    j["sigma"] = s;
    return j.dump();
}

} // namespace latmem
