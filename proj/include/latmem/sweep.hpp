#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latmem/pde.hpp"

namespace latmem {

/// Side of the band gap from which the lattice constant approaches the edge.
/// below: a < a_edge (signal frequency below the band-1 top).
/// above: a > a_edge (signal in band 2).
enum class Approach { below, above };

Approach parse_approach(std::string_view name);
std::string_view to_string(Approach a) noexcept;

struct SweepConfig {
    std::string label = "custom";
    Scenario base;
    Approach approach = Approach::below;
    /// Fractional edge detuning |a_edge/a − 1|, log-spaced from max down to min.
    double detuning_max = 3e-2;
    double detuning_min = 3e-5;
    int points = 40;
    bool run_pde = true;
    int pde_every = 5;
    bool run_band_scan = false;
    int workers = 1;

    /// Preset defaults: raman approaches from above, eit from below.
    static SweepConfig from_preset(std::string_view name);
    void validate() const;
};

/// Reads {"preset": ..., "scenario": {...}, "approach": ..., "detuning_max": ...,
/// "detuning_min": ..., "points": ..., "run_pde": ..., "pde_every": ...,
/// "run_band_scan": ..., "workers": ...}. Either preset or scenario is required.
SweepConfig sweep_config_from_json(const std::string& text);

struct BandEdge {
    double a_edge;     // lattice constant at the chosen gap edge
    double a_center;   // Bragg condition for the mean potential
    bool gap_found;    // false when the lossless comparison problem has no open gap
    double gap_lo = 0.0, gap_hi = 0.0;
};

/// Locates the edge of the first gap in lattice-constant space by bisection on
/// the lossless |trace| ≥ 2 predicate.
BandEdge locate_band_edge(const Scenario& s, Approach side);

struct SweepRow {
    double a_nm = 0.0;
    double edge_detuning_hz = 0.0; // (ω_edge − ω_s)/2π
    double re_k = 0.0, im_k = 0.0;
    double re_vg_over_c = 0.0;
    double re_alpha = 0.0, abs_alpha = 0.0;
    double mu = 0.0;
    double R = 0.0;
    double eta_opt = 0.0;
    double eta_net = 0.0;
    std::optional<double> eta_pde;
    double beta_L_over_T = 0.0;
    bool in_gap = false;
    std::string errors;

    /// Excluded from edge-approach trend checks.
    bool flagged() const { return in_gap || beta_L_over_T > 0.1 || !errors.empty(); }
};

/// Observables and efficiencies for a single scenario. Failures are recorded
/// in `errors` and the affected fields are NaN.
SweepRow evaluate_point(const Scenario& s, double a_edge, bool with_pde);

struct SweepTable {
    SweepConfig config;
    BandEdge edge;
    std::vector<SweepRow> rows; // ascending a
    std::vector<std::string> warnings;

    bool has_failures() const;
};

SweepTable run_sweep(const SweepConfig& cfg);

extern const char* const sweep_csv_header;
std::string sweep_csv(const SweepTable& t);
std::string sweep_summary_json(const SweepTable& t);

struct BandScanFiles {
    std::string overview; // bands ν = 1, 2
    std::string edge;     // close-up around the first zone edge
    std::string empty;    // m ≡ 0
};

/// Band scans at the scenario's lattice constant; k_s·a/π ∈ [0.02, 1.98]
/// (overview) and 1 ± 2e-3 (close-up).
BandScanFiles run_band_scan(const Scenario& s, int points, int workers);

} // namespace latmem
