#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latmem/observables.hpp"

namespace latmem {

/// Real control envelope Ω(τ). Gaussian: Ω₀·e^{−(τ/T)²}. Square: constant
/// amplitude on [−T, T], scaled to a prescribed total energy ∫|Ω|²dτ.
class ControlPulse {
public:
    static ControlPulse gaussian(double omega0, double T);
    static ControlPulse square(double energy, double T);
    static ControlPulse from_scenario(const Scenario& s);
    static ControlPulse zero(double T);

    PulseShape shape() const noexcept { return shape_; }
    double duration() const noexcept { return T_; }
    double amplitude() const noexcept { return amp_; }

    double rabi(double tau) const;
    /// ω(τ) = ∫_{−∞}^{τ} |Ω|² dτ′ (closed form).
    double integrated(double tau) const;
    double total_energy() const;
    /// Inverse of integrated() for ω strictly inside (0, total_energy()).
    double time_at(double omega) const;

private:
    ControlPulse(PulseShape shape, double amp, double T) : shape_(shape), amp_(amp), T_(T) {}

    PulseShape shape_;
    double amp_;
    double T_;
};

double integrated_rabi(const ControlPulse& pulse, double tau);

/// Gauss–Legendre nodes and weights on [lo, hi], ascending.
void gauss_legendre(int n, double lo, double hi, std::vector<double>& nodes, std::vector<double>& weights);

struct KernelGrids {
    int z_points = 200;
    int tau_points = 400;
    double window = 5.0; // τ ∈ [−window·T, window·T]

    static KernelGrids from_scenario(const Scenario& s) { return {s.z_points, s.tau_points, 5.0}; }
};

/// The coefficients shared by the kernel and the propagation equations.
struct MemoryCoefficients {
    double L;
    double kappa;
    cplx Gamma;
    double im_k;
    cplx coupling; // α·c/v_g
    cplx beta;

    static MemoryCoefficients from(const Scenario& s, const DerivedParams& p, const ModeObservables& o);
};

/// causal: the form below, which solves the propagation equations.
/// printed: (κ/Γ)·Ω(τ)·e^{−Im(k) z − ω(τ)/Γ}·J0(2κ·√(α·(c/v_g)·z·ω(τ))/Γ), kept
/// for comparison against the propagation solver.
enum class KernelForm { causal, printed };

/// Storage Green's function K(z, τ) of the walk-off-free memory equations.
///
/// K(z,τ) = (iκ/Γ)·Ω*(τ)·e^{−Im(k) z − ω̄(τ)/Γ}·J0(2i·κ·√(α·(c/v_g)·z·ω̄(τ))/Γ),
/// ω̄(τ) = ω(∞) − ω(τ) being the control energy still to arrive after τ.
/// The kernel is discretised as K̃_ij = √w^z_i · K(z_i, τ_j) · √w^τ_j, with
/// Gauss–Legendre nodes in z and Gauss–Legendre nodes in ω mapped back to τ
/// (w^τ_j = w^ω_j / |Ω(τ_j)|²), so σ(K̃) approximate the operator's singular values.
struct KernelMatrix {
    MemoryCoefficients coeff;
    ControlPulse pulse;
    KernelForm form = KernelForm::causal;
    std::vector<double> z, wz;
    std::vector<double> tau, wtau;
    std::vector<double> omega_nodes; // ω(τ_j)
    std::vector<double> omega_bary;  // barycentric weights for interpolation in ω
    Eigen::MatrixXcd matrix;

    /// Continuous kernel value K(z, τ).
    cplx value(double z, double tau) const;

    /// Evaluate a signal mode given on the τ nodes at arbitrary τ (spectral
    /// interpolation of A/Ω in the ω variable).
    cplx interpolate_input(const Eigen::VectorXcd& a_nodes, double tau) const;

    /// B_out(z) = ∫ K(z, τ) A(τ) dτ for arbitrary z, with A on the τ nodes.
    cplx spin_wave_at(const Eigen::VectorXcd& a_nodes, double z) const;
};

KernelMatrix build_kernel(const MemoryCoefficients& coeff, const ControlPulse& pulse, const KernelGrids& grids,
                          KernelForm form = KernelForm::causal);

KernelMatrix build_kernel(const Scenario& s, const DerivedParams& p, const ModeObservables& obs,
                          const ControlPulse& pulse, const KernelGrids& grids);

/// Rank-one test kernel K(z,τ) = f(z)·g(τ) on the same discretisation.
KernelMatrix build_separable_kernel(const KernelMatrix& like, const std::vector<cplx>& f_z,
                                    const std::vector<cplx>& g_tau);

struct EfficiencyResult {
    double eta_opt = 0.0;
    Eigen::VectorXd sigma;
    Eigen::VectorXcd input;     // A_in on τ nodes, ∫|A_in|²dτ = 1
    Eigen::VectorXcd spin_wave; // B_out on z nodes
    double sigma_power = 0.0;   // σ_max from power iteration
    int power_iterations = 0;
};

EfficiencyResult optimal_efficiency(const KernelMatrix& K);

struct StorageResult {
    Eigen::VectorXcd spin_wave;
    double eta = 0.0;
};

StorageResult storage_efficiency(const KernelMatrix& K, const Eigen::VectorXcd& a_in);

/// CSV blocks: tau_ns,re_Ain,im_Ain and z_um,re_Bout,im_Bout.
std::string input_mode_csv(const KernelMatrix& K, const EfficiencyResult& r);
std::string spin_wave_csv(const KernelMatrix& K, const EfficiencyResult& r);
/// {"eta_opt": ..., "sigma": [...]}
std::string efficiency_json(const EfficiencyResult& r);

} // namespace latmem
