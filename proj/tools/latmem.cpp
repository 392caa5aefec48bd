#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "latmem/sweep.hpp"

namespace fs = std::filesystem;
using namespace latmem;

namespace {

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::invalid_input, "cannot write " + path.string());
    out << text;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::invalid_input, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ScenarioSource {
    std::string preset;
    std::string file;

    std::string label() const { return preset.empty() ? "custom" : preset; }
    Scenario load() const
    {
        if (!file.empty()) return load_scenario(file);
        return latmem::preset(preset.empty() ? "raman" : preset);
    }
};

int run_sweep_cmd(const std::string& preset_name, const std::string& config, const std::string& out_dir,
                  int workers, bool no_pde, bool json)
{
    SweepConfig cfg;
    if (!config.empty()) {
        cfg = sweep_config_from_json(read_file(config));
        if (!preset_name.empty()) {
            const SweepConfig p = SweepConfig::from_preset(preset_name);
            cfg.base = p.base;
            cfg.label = p.label;
        }
    } else {
        if (preset_name.empty()) throw Error(ErrorKind::invalid_input, "sweep needs --preset or --config");
        cfg = SweepConfig::from_preset(preset_name);
    }
    if (workers > 0) cfg.workers = workers;
    if (no_pde) cfg.run_pde = false;
    cfg.validate();

    const SweepTable t = run_sweep(cfg);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / ("sweep_" + cfg.label + ".csv"), sweep_csv(t));
    const std::string summary = sweep_summary_json(t);
    write_file(fs::path(out_dir) / ("sweep_" + cfg.label + ".json"), summary + "\n");
    if (cfg.run_band_scan) {
        const BandScanFiles b = run_band_scan(cfg.base, 400, cfg.workers);
        write_file(fs::path(out_dir) / ("bands_" + cfg.label + ".csv"), b.overview);
        write_file(fs::path(out_dir) / ("bands_" + cfg.label + "_edge.csv"), b.edge);
        write_file(fs::path(out_dir) / "bands_empty.csv", b.empty);
    }
    for (const auto& w : t.warnings) std::cerr << "warning: " << w << '\n';
    if (json) std::cout << summary << '\n';
    return t.has_failures() ? 2 : 0;
}

int run_bands_cmd(const ScenarioSource& src, const std::string& out_dir, int points, int workers, bool json)
{
    const Scenario s = src.load();
    s.validate();
    const BandScanFiles b = run_band_scan(s, points, std::max(1, workers));
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / ("bands_" + src.label() + ".csv"), b.overview);
    write_file(fs::path(out_dir) / ("bands_" + src.label() + "_edge.csv"), b.edge);
    write_file(fs::path(out_dir) / "bands_empty.csv", b.empty);
    if (json) std::cout << nlohmann::json{{"label", src.label()}, {"points", points}}.dump() << '\n';
    return 0;
}

int run_point_cmd(const ScenarioSource& src, double a_nm, bool pde, const std::string& out_dir, bool json)
{
    Scenario s = src.load();
    if (a_nm > 0) s = s.with_lattice_constant(a_nm * 1e-9);
    for (const auto& w : s.validate()) std::cerr << "warning: " << w << '\n';
    const Approach side = src.preset == "raman" ? Approach::above : Approach::below;
    const BandEdge edge = locate_band_edge(s, side);
    const SweepRow row = evaluate_point(s, edge.a_edge, pde);

    if (!out_dir.empty() && row.errors.empty()) {
        const DerivedParams p = derive_params(s);
        const CellGrid grid(s.a, s.cell_points);
        const Modulation m = modulation(grid, s.a, s.w);
        const BlochMode mode = solve_bloch(potential(m, p, s.L), p.k_s);
        const ModeObservables o = compute_observables(mode, m, s, p);
        const KernelMatrix K = build_kernel(s, p, o, ControlPulse::from_scenario(s), KernelGrids::from_scenario(s));
        const EfficiencyResult eff = optimal_efficiency(K);
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "input_mode.csv", input_mode_csv(K, eff));
        write_file(fs::path(out_dir) / "spin_wave.csv", spin_wave_csv(K, eff));
        write_file(fs::path(out_dir) / "efficiency.json", efficiency_json(eff) + "\n");
    }

    SweepTable t;
    t.rows.push_back(row);
    if (json) {
        nlohmann::json j{{"a_nm", row.a_nm},         {"edge_detuning_hz", row.edge_detuning_hz},
                         {"re_k", row.re_k},         {"im_k", row.im_k},
                         {"re_vg_over_c", row.re_vg_over_c}, {"re_alpha", row.re_alpha},
                         {"abs_alpha", row.abs_alpha}, {"mu", row.mu},
                         {"R", row.R},               {"eta_opt", row.eta_opt},
                         {"eta_net", row.eta_net},   {"beta_L_over_T", row.beta_L_over_T},
                         {"in_gap", row.in_gap},     {"errors", row.errors}};
        if (row.eta_pde) j["eta_pde"] = *row.eta_pde;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << sweep_csv(t);
    }
    return row.errors.empty() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Band structure and storage efficiency of lattice quantum memories"};
    app.require_subcommand(1);

    std::string preset_name, config, out_dir = ".";
    int workers = 0, points = 400;
    bool json = false, no_pde = false, pde = false;
    double a_nm = 0.0;

    auto* sweep = app.add_subcommand("sweep", "band-edge approach sweep");
    sweep->add_option("--preset", preset_name, "raman or eit");
    sweep->add_option("--config", config, "sweep configuration JSON");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--workers", workers, "worker threads");
    sweep->add_flag("--no-pde", no_pde, "skip the propagation cross-check");
    sweep->add_flag("--json", json, "print the summary to stdout");

    ScenarioSource src;
    auto* bands = app.add_subcommand("bands", "band structure scans");
    bands->add_option("--preset", src.preset, "raman or eit");
    bands->add_option("--config", src.file, "scenario JSON");
    bands->add_option("--out", out_dir, "output directory");
    bands->add_option("--points", points, "points per scan");
    bands->add_option("--workers", workers, "worker threads");
    bands->add_flag("--json", json, "print a summary to stdout");

    auto* point = app.add_subcommand("point", "observables at one lattice constant");
    point->add_option("--preset", src.preset, "raman or eit");
    point->add_option("--config", src.file, "scenario JSON");
    point->add_option("--a-nm", a_nm, "lattice constant in nm");
    point->add_option("--out", out_dir, "write input_mode.csv, spin_wave.csv, efficiency.json here");
    point->add_flag("--pde", pde, "run the propagation cross-check");
    point->add_flag("--json", json, "print JSON instead of a CSV row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sweep) return run_sweep_cmd(preset_name, config, out_dir, workers, no_pde, json);
        if (*bands) return run_bands_cmd(src, out_dir, points, workers, json);
        return run_point_cmd(src, a_nm, pde, point->count("--out") ? out_dir : "", json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
