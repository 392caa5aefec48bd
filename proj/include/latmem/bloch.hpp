#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "latmem/scenario.hpp"

namespace latmem {

/// Periodic cubic spline through complex samples on a uniform cell grid.
class PeriodicSpline {
public:
    PeriodicSpline(double period, std::vector<cplx> samples);

    cplx operator()(double z) const;

private:
    double period_;
    double h_;
    std::vector<cplx> y_;
    std::vector<cplx> m_; // second derivatives at the knots
};

/// Fundamental solutions of φ'' + k_s²Vφ = 0 over one cell in the scaled
/// state (φ, φ'/k_s). Column 0 starts at (1, 0), column 1 at (0, 1).
struct FundamentalSystem {
    std::vector<Eigen::Matrix2cd> at_grid; // Y(z_j) for each cell grid point
    Eigen::Matrix2cd at_end;               // Y(a), the monodromy
};

FundamentalSystem integrate_cell(const Potential& V, double k_s, double tol = 1e-10);

struct Monodromy {
    Eigen::Matrix2cd matrix;
    double tol = 1e-10;
    /// Trace of the monodromy of the lossless comparison problem (Re V only).
    double lossless_trace = 0.0;

    cplx det() const { return matrix.determinant(); }
    cplx trace() const { return matrix.trace(); }
};

/// One-period transfer matrix of (φ, φ'/k_s). Also integrates the lossless
/// comparison potential, whose trace decides gap membership.
Monodromy monodromy(const Potential& V, double k_s, double tol = 1e-10);

struct CrystalMomentum {
    cplx k;             // forward branch: Im k >= 0, Re k in (−π/a, π/a]
    bool in_gap = false;
    cplx lambda_fwd;    // e^{ika}
    cplx lambda_bwd;    // e^{−ika}
};

CrystalMomentum crystal_momentum(const Monodromy& m, double a);

/// Forward Bloch mode with its conjugate (left) partner, sampled on the cell grid.
///
/// The carrier φ is stored damping-stripped, φ = e^{i Re(k) z}·u(z), with u
/// periodic. The conjugate mode ψ is the left eigenvector of M = −V⁻¹∂²:
/// writing ψ = V·χ turns the left-eigenvector condition into χ'' + k_s²Vχ = 0,
/// the same equation as φ, and the bilinear pairing ∫ψφ is only periodic when
/// χ carries crystal momentum −k. So χ is built from the second monodromy
/// eigenvector (eigenvalue e^{−ika}), stripped by e^{−Im(k) z}, and scaled so
/// that ∫₀ᵃ ψφ dz = 1.
struct BlochMode {
    CellGrid grid;
    double k_s = 0.0;
    cplx k;
    double im_k = 0.0;
    int band_index = 1;
    bool in_gap = false;

    std::vector<cplx> phi;  // e^{i Re k z} u(z)
    std::vector<cplx> dphi; // ∂_z φ
    std::vector<cplx> u;
    std::vector<cplx> psi;

    cplx u0;       // u(0)
    cplx du0;      // u'(0)
    double periodicity_error = 0.0; // |u(a) − u(0)| / max|u|
};

BlochMode bloch_mode(const Potential& V, double k_s, const CrystalMomentum& cm, double tol = 1e-10);

/// Convenience: monodromy → crystal momentum → mode.
BlochMode solve_bloch(const Potential& V, double k_s, double tol = 1e-10);

struct BandPoint {
    double k_s;
    double re_k; // reduced-zone |Re k|, in [0, π/a]
    double im_k;
    int band_index;
    bool in_gap;
};

/// Crystal momenta along a monotone list of signal wavenumbers for fixed
/// scenario geometry. Band indices follow continuity of the extended-zone
/// Re k. Points are evaluated with up to `workers` threads; the result does
/// not depend on the worker count.
std::vector<BandPoint> band_scan(const Scenario& s, std::span<const double> k_s_values, int workers = 1);

/// Band scan with the modulation forced to m ≡ 0 (empty lattice, V ≡ 1).
std::vector<BandPoint> band_scan_empty(const Scenario& s, std::span<const double> k_s_values);

std::string band_csv(std::span<const BandPoint> points);

} // namespace latmem
