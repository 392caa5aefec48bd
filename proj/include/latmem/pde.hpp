#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latmem/kernel.hpp"

namespace latmem {

struct PdeGrids {
    int z_points = 200;
    int tau_points = 400;
    double window = 5.0;
    bool keep_fields = false; // store A and B on the full grid

    static PdeGrids from_scenario(const Scenario& s) { return {s.z_points, s.tau_points, 5.0, false}; }
};

/// A(z_i, τ_j) and B(z_i, τ_j), rows indexed by z. Empty unless keep_fields.
struct FieldState {
    std::vector<double> z, tau;
    Eigen::MatrixXcd A, B;
};

struct PropagationResult {
    FieldState fields;
    std::vector<double> z;
    Eigen::VectorXcd spin_wave; // B(z, τ_max)
    double eta = 0.0;
    std::vector<std::string> warnings;
};

/// Marches the moving-frame memory equations
///   [∂z + Im k] A = −(c/v_g)·α·(iκ/Γ)·Ω(τ + βz)·B
///   [∂τ + |Ω(τ + βz)|²/Γ] B = (iκ/Γ)·Ω*(τ + βz)·A
/// on uniform grids, with A(0, τ) = a_in(τ) and B(z, −window·T) = 0.
/// Set `with_walk_off` false to drop β.
PropagationResult propagate(const MemoryCoefficients& coeff, const ControlPulse& pulse,
                            const std::function<cplx(double)>& a_in, const PdeGrids& grids,
                            bool with_walk_off = true);

struct OracleComparison {
    double eta_kernel = 0.0;
    double eta_pde = 0.0;
    double spin_wave_mismatch = 0.0; // ‖B_kernel − B_pde‖ / ‖B_pde‖ on the PDE z grid
};

/// Propagates the kernel's optimal input and compares efficiency and output
/// spin wave with the kernel prediction.
OracleComparison compare_with_propagation(const KernelMatrix& K, const EfficiencyResult& r, const PdeGrids& grids);

/// |A|² and |B|² as CSV matrices (first column z_um, one column per τ).
std::string field_dump_csv(const FieldState& f, bool spin_wave);

} // namespace latmem
