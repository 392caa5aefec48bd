#include "latmem/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "latmem/parallel.hpp"

namespace latmem {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double lossless_trace_at(const Scenario& s, double a)
{
    const Scenario sa = s.with_lattice_constant(a);
    const DerivedParams p = derive_params(sa);
    const CellGrid grid(a, sa.cell_points);
    const Potential V = potential(modulation(grid, a, sa.w), p, sa.L);
    return monodromy(V, p.k_s).lossless_trace;
}

bool gap_at(const Scenario& s, double a)
{
    return std::abs(lossless_trace_at(s, a)) > 2.0;
}

std::string csv_field(const std::string& s)
{
    std::string out = s;
    std::replace(out.begin(), out.end(), ',', ';');
    std::replace(out.begin(), out.end(), '\n', ' ');
    return out;
}

} // namespace

Approach parse_approach(std::string_view name)
{
    if (name == "below") return Approach::below;
    if (name == "above") return Approach::above;
    throw Error(ErrorKind::invalid_input, "approach must be 'below' or 'above'");
}

std::string_view to_string(Approach a) noexcept
{
    return a == Approach::below ? "below" : "above";
}

SweepConfig SweepConfig::from_preset(std::string_view name)
{
    SweepConfig cfg;
    cfg.base = preset(name);
    cfg.label = std::string(name);
    // The Raman gap opens above the Bragg condition; its band-2 side carries
    // the slow-light, high-overlap branch.
    cfg.approach = name == "raman" ? Approach::above : Approach::below;
    return cfg;
}

void SweepConfig::validate() const
{
    base.validate();
    if (points < 2) throw Error(ErrorKind::invalid_input, "sweep needs at least 2 points");
    if (!(detuning_min > 0) || !(detuning_max > detuning_min) || !(detuning_max < 0.5))
        throw Error(ErrorKind::invalid_input, "need 0 < detuning_min < detuning_max < 0.5");
    if (pde_every < 1) throw Error(ErrorKind::invalid_input, "pde_every must be >= 1");
    if (workers < 1) throw Error(ErrorKind::invalid_input, "workers must be >= 1");
}

SweepConfig sweep_config_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, std::string("sweep config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::schema, "sweep config must be a JSON object");
    static const char* const known[] = {"preset", "scenario", "approach", "detuning_max", "detuning_min",
                                        "points", "run_pde", "pde_every", "run_band_scan", "workers"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) ==
            std::end(known))
            throw Error(ErrorKind::schema, "unknown sweep config key: " + it.key());

    SweepConfig cfg;
    try {
        if (j.contains("preset")) cfg = SweepConfig::from_preset(j.at("preset").get<std::string>());
        if (j.contains("scenario")) {
            cfg.base = scenario_from_json(j.at("scenario").dump());
            if (!j.contains("preset")) cfg.label = "custom";
        }
        if (!j.contains("preset") && !j.contains("scenario"))
            throw Error(ErrorKind::schema, "sweep config needs 'preset' or 'scenario'");
        if (j.contains("approach")) cfg.approach = parse_approach(j.at("approach").get<std::string>());
        if (j.contains("detuning_max")) cfg.detuning_max = j.at("detuning_max").get<double>();
        if (j.contains("detuning_min")) cfg.detuning_min = j.at("detuning_min").get<double>();
        if (j.contains("points")) cfg.points = j.at("points").get<int>();
        if (j.contains("run_pde")) cfg.run_pde = j.at("run_pde").get<bool>();
        if (j.contains("pde_every")) cfg.pde_every = j.at("pde_every").get<int>();
        if (j.contains("run_band_scan")) cfg.run_band_scan = j.at("run_band_scan").get<bool>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, std::string("sweep config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

BandEdge locate_band_edge(const Scenario& s, Approach side)
{
    const DerivedParams p = derive_params(s);
    const double mean_re_v = 1.0 + (2.0 * cplx(0.0, 1.0) * p.d_gamma / (p.Gamma * s.L * p.k_s)).real();
    if (!(mean_re_v > 0)) throw Error(ErrorKind::invalid_input, "mean potential is not positive");

    BandEdge edge;
    edge.a_center = s.lambda_s / 2.0 / std::sqrt(mean_re_v);
    edge.a_edge = edge.a_center;
    edge.gap_found = false;

    constexpr int half = 80;
    constexpr double span = 2e-3;
    std::vector<double> grid(2 * half + 1);
    std::vector<char> in(grid.size());
    for (int i = 0; i <= 2 * half; ++i) {
        grid[i] = edge.a_center * (1.0 + span * (i - half) / half);
        in[i] = gap_at(s, grid[i]);
    }
    int seed = -1;
    for (int off = 0; off <= half && seed < 0; ++off) {
        if (in[half + off]) seed = half + off;
        else if (in[half - off]) seed = half - off;
    }
    if (seed < 0) return edge;

    auto bisect = [&](double inside, double outside) {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (mid == inside || mid == outside) break;
            (gap_at(s, mid) ? inside : outside) = mid;
        }
        return outside;
    };
    int hi = seed, lo = seed;
    while (hi < 2 * half && in[hi + 1]) ++hi;
    while (lo > 0 && in[lo - 1]) --lo;
    if (hi == 2 * half || lo == 0) throw Error(ErrorKind::band_edge_degeneracy, "gap wider than the pre-scan window");

    edge.gap_found = true;
    edge.gap_hi = bisect(grid[hi], grid[hi + 1]);
    edge.gap_lo = bisect(grid[lo], grid[lo - 1]);
    edge.a_edge = side == Approach::above ? edge.gap_hi : edge.gap_lo;
    return edge;
}

SweepRow evaluate_point(const Scenario& s, double a_edge, bool with_pde)
{
    SweepRow row;
    row.a_nm = s.a * 1e9;
    row.edge_detuning_hz = speed_of_light / s.lambda_s * (a_edge / s.a - 1.0);
    row.re_k = row.im_k = row.re_vg_over_c = row.re_alpha = row.abs_alpha = nan;
    row.mu = row.R = row.eta_opt = row.eta_net = row.beta_L_over_T = nan;

    std::vector<std::string> errors;
    try {
        const DerivedParams p = derive_params(s);
        const CellGrid grid(s.a, s.cell_points);
        const Modulation m = modulation(grid, s.a, s.w);
        const BlochMode mode = solve_bloch(potential(m, p, s.L), p.k_s);
        row.re_k = mode.k.real();
        row.im_k = mode.im_k;
        row.in_gap = mode.in_gap;

        const ModeObservables o = compute_observables(mode, m, s, p);
        row.re_vg_over_c = (o.v_g / speed_of_light).real();
        row.re_alpha = o.alpha.real();
        row.abs_alpha = std::abs(o.alpha);
        row.mu = o.mu;
        row.R = o.R;
        row.beta_L_over_T = std::abs(o.beta) * s.L / s.T;

        const ControlPulse pulse = ControlPulse::from_scenario(s);
        const KernelMatrix K = build_kernel(s, p, o, pulse, KernelGrids::from_scenario(s));
        const EfficiencyResult eff = optimal_efficiency(K);
        row.eta_opt = eff.eta_opt;
        row.eta_net = (1.0 - row.R) * row.eta_opt;

        if (with_pde) {
            auto a_in = [&](double t) { return K.interpolate_input(eff.input, t); };
            const PropagationResult pr = propagate(K.coeff, pulse, a_in, PdeGrids::from_scenario(s));
            row.eta_pde = pr.eta;
        }
    } catch (const Error& e) {
        errors.push_back(e.what());
    } catch (const std::exception& e) {
        errors.push_back(std::string(to_string(ErrorKind::numerical_failure)) + ": " + e.what());
    }
    for (const auto& e : errors) row.errors += (row.errors.empty() ? "" : "; ") + e;
    return row;
}

bool SweepTable::has_failures() const
{
    return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.errors.empty(); });
}

SweepTable run_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    SweepTable t;
    t.config = cfg;
    t.warnings = cfg.base.validate();
    t.edge = locate_band_edge(cfg.base, cfg.approach);
    if (!t.edge.gap_found)
        t.warnings.push_back("no open gap in the lossless comparison problem; edge taken at the Bragg condition");

    const int n = cfg.points;
    const double ratio = std::log(cfg.detuning_min / cfg.detuning_max);
    t.rows.resize(n);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        const double f = cfg.detuning_max * std::exp(ratio * double(i) / (n - 1));
        const double a = cfg.approach == Approach::below ? t.edge.a_edge / (1.0 + f) : t.edge.a_edge / (1.0 - f);
        const bool pde = cfg.run_pde && i % cfg.pde_every == 0;
        t.rows[i] = evaluate_point(cfg.base.with_lattice_constant(a), t.edge.a_edge, pde);
    });
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const SweepRow& x, const SweepRow& y) { return x.a_nm < y.a_nm; });
    return t;
}

const char* const sweep_csv_header =
    "a_nm,edge_detuning_hz,re_k,im_k,re_vg_over_c,re_alpha,abs_alpha,mu,R,eta_opt,eta_net,eta_pde,"
    "beta_L_over_T,in_gap,errors";

std::string sweep_csv(const SweepTable& t)
{
    std::ostringstream os;
    os << std::setprecision(17) << sweep_csv_header << '\n';
    for (const SweepRow& r : t.rows) {
        os << r.a_nm << ',' << r.edge_detuning_hz << ',' << r.re_k << ',' << r.im_k << ',' << r.re_vg_over_c << ','
           << r.re_alpha << ',' << r.abs_alpha << ',' << r.mu << ',' << r.R << ',' << r.eta_opt << ',' << r.eta_net
           << ',' << (r.eta_pde ? *r.eta_pde : nan) << ',' << r.beta_L_over_T << ',' << (r.in_gap ? 1 : 0) << ','
           << csv_field(r.errors) << '\n';
    }
    return os.str();
}

std::string sweep_summary_json(const SweepTable& t)
{
    nlohmann::json j;
    j["label"] = t.config.label;
    j["approach"] = std::string(to_string(t.config.approach));
    j["a_edge_nm"] = t.edge.a_edge * 1e9;
    j["gap_found"] = t.edge.gap_found;
    if (t.edge.gap_found) j["gap_nm"] = {t.edge.gap_lo * 1e9, t.edge.gap_hi * 1e9};
    j["points"] = t.rows.size();
    int failures = 0, flagged = 0;
    double eta_min = std::numeric_limits<double>::infinity();
    for (const auto& r : t.rows) {
        failures += !r.errors.empty();
        flagged += r.flagged();
        if (std::isfinite(r.eta_opt)) eta_min = std::min(eta_min, r.eta_opt);
    }
    j["failures"] = failures;
    j["flagged"] = flagged;
    j["warnings"] = t.warnings;
    // Rows are ordered by a; the far end is the one with the largest |detuning|.
    if (!t.rows.empty()) {
        const bool below = t.config.approach == Approach::below;
        const SweepRow& far = below ? t.rows.front() : t.rows.back();
        const SweepRow& near = below ? t.rows.back() : t.rows.front();
        auto point = [](const SweepRow& r) {
            return nlohmann::json{{"a_nm", r.a_nm}, {"eta_opt", r.eta_opt}, {"eta_net", r.eta_net}, {"R", r.R}};
        };
        j["far"] = point(far);
        j["near"] = point(near);
        if (std::isfinite(eta_min)) j["eta_opt_min"] = eta_min;
    }
    return j.dump(2);
}

BandScanFiles run_band_scan(const Scenario& s, int points, int workers)
{
    if (points < 2) throw Error(ErrorKind::invalid_input, "band scan needs at least 2 points");
    auto span_ks = [&](double lo, double hi) {
        std::vector<double> ks(points);
        for (int i = 0; i < points; ++i) ks[i] = (lo + (hi - lo) * i / (points - 1)) * pi / s.a;
        return ks;
    };
    const std::vector<double> wide = span_ks(0.02, 1.98);
    const std::vector<double> close = span_ks(1.0 - 2e-3, 1.0 + 2e-3);
    BandScanFiles f;
    f.overview = band_csv(band_scan(s, wide, workers));
    f.edge = band_csv(band_scan(s, close, workers));
    f.empty = band_csv(band_scan_empty(s, wide));
    return f;
}

} // namespace latmem
