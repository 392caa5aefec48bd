#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latmem/error.hpp"

namespace latmem {

using cplx = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double pi = 3.14159265358979323846;

enum class PulseShape { gaussian, square };

PulseShape parse_pulse_shape(std::string_view name);
std::string_view to_string(PulseShape shape) noexcept;

/// Physical inputs of one lattice-memory configuration, SI units, rates in rad/s.
struct Scenario {
    double lambda_s = 800e-9;    // signal wavelength
    double gamma = 1.0 / 30e-9;  // homogeneous linewidth
    double delta = 0.0;          // one-photon detuning
    double d = 30.0;             // resonant optical depth
    double L = 1e-3;             // ensemble length
    double a = 320e-9;           // lattice constant
    double w = 32e-9;            // width of the per-site Gaussian
    double omega0 = 5.5 / 30e-9; // peak Rabi frequency
    double T = 30e-9;            // control duration
    PulseShape pulse_shape = PulseShape::gaussian;
    int cell_points = 1024;
    int z_points = 200;
    int tau_points = 400;

    /// T·d·γ; the adiabatic elimination assumes this is large.
    double adiabaticity() const { return T * d * gamma; }

    /// Throws invalid_input when an invariant is violated. Returns warnings
    /// (for example weak adiabaticity) that do not prevent construction.
    std::vector<std::string> validate() const;

    Scenario with_lattice_constant(double a_new) const;
};

/// Named presets: "raman" (d=300, T=3 ns, Δ=15/T) and "eit" (d=30, T=30 ns, Δ=0).
Scenario preset(std::string_view name);

/// Reads the JSON scenario format (keys lambda_s_nm, gamma_inv_ns, ...).
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& s);

struct DerivedParams {
    double k_s;     // 1/m
    double omega_s; // rad/s
    cplx Gamma;     // γ − iΔ
    double d_gamma; // d·γ (rad/s)
    double kappa;   // sqrt(dγ/L)
    long n_cells;

    // dimensionless diagnostics
    double d_gamma_T;
    double delta_over_gamma;
    double a_ks_over_pi;
};

DerivedParams derive_params(const Scenario& s);

/// Uniform periodic grid z_j = j·a/n, j = 0..n−1.
class CellGrid {
public:
    CellGrid(double a, int n);

    double period() const noexcept { return a_; }
    int size() const noexcept { return n_; }
    double spacing() const noexcept { return a_ / n_; }
    double z(int j) const noexcept { return j * a_ / n_; }

    /// Composite Simpson weights for a periodic integrand over one cell.
    const std::vector<double>& weights() const noexcept { return weights_; }

    template <class T>
    T integrate(const std::vector<T>& f) const
    {
        T acc{};
        for (int j = 0; j < n_; ++j) acc += weights_[j] * f[j];
        return acc;
    }

private:
    double a_;
    int n_;
    std::vector<double> weights_;
};

/// Samples of the density modulation m(z) on a cell grid.
struct Modulation {
    CellGrid grid;
    std::vector<double> m;

    static Modulation uniform(const CellGrid& grid);
};

/// Periodised Gaussian centred at a/2, normalised to unit cell average.
/// No restriction on w; used by modulation() and by limit checks.
std::vector<double> periodized_gaussian(const CellGrid& grid, double w);

Modulation modulation(const CellGrid& grid, double a, double w);

struct Potential {
    CellGrid grid;
    std::vector<cplx> v;
};

/// V(z) = 1 + 2i·d·γ·m(z) / (Γ·L·k_s).
Potential potential(const Modulation& m, const DerivedParams& p, double L);

} // namespace latmem
