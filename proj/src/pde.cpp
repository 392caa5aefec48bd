#include "latmem/pde.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace latmem {

namespace {

// φ1(x) = (eˣ − 1)/x and φ2(x) = (eˣ − 1 − x)/x², with series near 0.
void phi_functions(cplx x, cplx& phi1, cplx& phi2)
{
    if (std::abs(x) < 1e-3) {
        phi1 = 1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0));
        phi2 = 0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0));
        return;
    }
    const cplx em1 = std::expm1(x.real()) * std::polar(1.0, x.imag()) + (std::polar(1.0, x.imag()) - 1.0);
    phi1 = em1 / x;
    phi2 = (em1 - x) / (x * x);
}

} // namespace

PropagationResult propagate(const MemoryCoefficients& coeff, const ControlPulse& pulse,
                            const std::function<cplx(double)>& a_in, const PdeGrids& grids,
                            bool with_walk_off)
{
    const int nz = grids.z_points, nt = grids.tau_points;
    if (nz < 2 || nt < 2) throw Error(ErrorKind::invalid_input, "propagation grids need at least 2 points");
    if (!(coeff.L > 0)) throw Error(ErrorKind::invalid_input, "medium length must be positive");

    const double T = pulse.duration();
    const double t0 = -grids.window * T, t1 = grids.window * T;
    const double hz = coeff.L / (nz - 1), ht = (t1 - t0) / (nt - 1);

    PropagationResult out;
    std::vector<double> z(nz), tau(nt);
    for (int i = 0; i < nz; ++i) z[i] = i * hz;
    for (int j = 0; j < nt; ++j) tau[j] = t0 + j * ht;

    const double shift_rate = with_walk_off ? coeff.beta.real() : 0.0;
    if (with_walk_off && std::abs(coeff.beta.imag()) * coeff.L > 0.01 * T) {
        std::ostringstream os;
        os << "|Im beta|*L/T = " << std::abs(coeff.beta.imag()) * coeff.L / T << " ignored in the walk-off shift";
        out.warnings.push_back(os.str());
    }

    const cplx I(0.0, 1.0);
    const cplx to_spin = I * coeff.kappa / coeff.Gamma;    // B ← A
    const cplx to_signal = -coeff.coupling * to_spin;       // A ← B
    const double att = std::exp(-coeff.im_k * hz);

    std::vector<double> shift(nz);
    for (int i = 0; i < nz; ++i) shift[i] = shift_rate * z[i];

    Eigen::VectorXcd A_prev(nz), B_prev = Eigen::VectorXcd::Zero(nz);
    Eigen::VectorXcd A_cur(nz), B_cur(nz);

    auto march_z = [&](int j, const Eigen::VectorXcd* Bp, const Eigen::VectorXcd* Ap, Eigen::VectorXcd& A,
                       Eigen::VectorXcd& B) {
        A[0] = a_in(tau[j]);
        cplx drive_prev = 0.0;
        for (int i = 0; i < nz; ++i) {
            const double om = pulse.rabi(tau[j] + shift[i]);
            // B at this τ level is affine in A: B = P + Q·A.
            cplx P = 0.0, Q = 0.0;
            if (Bp) {
                const double om_prev = pulse.rabi(tau[j - 1] + shift[i]);
                const double dw = pulse.integrated(tau[j] + shift[i]) - pulse.integrated(tau[j - 1] + shift[i]);
                // Exponential integrator, exact for a source linear in τ
                // under a locally constant damping rate.
                const cplx E = dw / coeff.Gamma;
                cplx phi1, phi2;
                phi_functions(-E, phi1, phi2);
                P = std::exp(-E) * (*Bp)[i] + ht * (phi1 - phi2) * to_spin * om_prev * (*Ap)[i];
                Q = ht * phi2 * to_spin * om;
            }
            const cplx D = to_signal * om;
            if (i == 0) {
                B[0] = P + Q * A[0];
            } else {
                const cplx rhs = att * (A[i - 1] + 0.5 * hz * drive_prev);
                A[i] = (rhs + 0.5 * hz * D * P) / (1.0 - 0.5 * hz * D * Q);
                B[i] = P + Q * A[i];
            }
            drive_prev = D * B[i];
        }
    };

    if (grids.keep_fields) {
        out.fields.z = z;
        out.fields.tau = tau;
        out.fields.A.resize(nz, nt);
        out.fields.B.resize(nz, nt);
    }

    double in_norm = 0.0;
    for (int j = 0; j < nt; ++j) {
        if (j == 0)
            march_z(0, nullptr, nullptr, A_cur, B_cur);
        else
            march_z(j, &B_prev, &A_prev, A_cur, B_cur);
        if (!A_cur.allFinite() || !B_cur.allFinite())
            throw Error(ErrorKind::numerical_failure, "non-finite field during propagation");
        const double wj = (j == 0 || j == nt - 1) ? 0.5 : 1.0;
        in_norm += wj * ht * std::norm(A_cur[0]);
        if (grids.keep_fields) {
            out.fields.A.col(j) = A_cur;
            out.fields.B.col(j) = B_cur;
        }
        std::swap(A_prev, A_cur);
        std::swap(B_prev, B_cur);
    }
    if (!(in_norm > 0)) throw Error(ErrorKind::invalid_input, "input signal has zero norm");

    out.z = z;
    out.spin_wave = B_prev;
    double stored = 0.0;
    for (int i = 0; i < nz; ++i) stored += ((i == 0 || i == nz - 1) ? 0.5 : 1.0) * hz * std::norm(B_prev[i]);
    out.eta = stored / in_norm;
    return out;
}

OracleComparison compare_with_propagation(const KernelMatrix& K, const EfficiencyResult& r, const PdeGrids& grids)
{
    auto a_in = [&](double t) { return K.interpolate_input(r.input, t); };
    const PropagationResult pr = propagate(K.coeff, K.pulse, a_in, grids, false);
    Eigen::VectorXcd a_nodes(r.input.size());
    for (Eigen::Index j = 0; j < a_nodes.size(); ++j) a_nodes[j] = r.input[j];
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < pr.z.size(); ++i) {
        const cplx bk = K.spin_wave_at(a_nodes, pr.z[i]);
        diff += std::norm(bk - pr.spin_wave[i]);
        ref += std::norm(pr.spin_wave[i]);
    }
    OracleComparison c;
    c.eta_kernel = r.eta_opt;
    c.eta_pde = pr.eta;
    c.spin_wave_mismatch = ref > 0 ? std::sqrt(diff / ref) : std::sqrt(diff);
    return c;
}

std::string field_dump_csv(const FieldState& f, bool spin_wave)
{
    const Eigen::MatrixXcd& M = spin_wave ? f.B : f.A;
    std::ostringstream os;
    os << std::setprecision(10) << "z_um";
    for (double t : f.tau) os << ",tau_ns=" << t * 1e9;
    os << '\n';
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        os << f.z[i] * 1e6;
        for (Eigen::Index j = 0; j < M.cols(); ++j) os << ',' << std::norm(M(i, j));
        os << '\n';
    }
    return os.str();
}

} // namespace latmem
