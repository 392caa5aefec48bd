#include "latmem/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace latmem {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::integration_failure: return "integration failure";
    case ErrorKind::band_edge_degeneracy: return "band-edge degeneracy";
    case ErrorKind::mode_orthogonality: return "mode orthogonality";
    case ErrorKind::total_reflection: return "total-reflection singularity";
    case ErrorKind::walk_off_too_large: return "walk-off too large";
    case ErrorKind::numerical_failure: return "numerical failure";
    case ErrorKind::step_size: return "step size";
    case ErrorKind::schema: return "schema";
    }
    return "unknown";
}

PulseShape parse_pulse_shape(std::string_view name)
{
    if (name == "gaussian") return PulseShape::gaussian;
    if (name == "square") return PulseShape::square;
    throw Error(ErrorKind::invalid_input, "unknown pulse shape '" + std::string(name) + "'");
}

std::string_view to_string(PulseShape shape) noexcept
{
    return shape == PulseShape::gaussian ? "gaussian" : "square";
}

namespace {

void require(bool ok, const std::string& msg)
{
    if (!ok) throw Error(ErrorKind::invalid_input, msg);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

std::vector<std::string> Scenario::validate() const
{
    require(positive(lambda_s), "lambda_s must be positive and finite");
    require(positive(gamma), "gamma must be positive and finite");
    require(std::isfinite(delta) && delta >= 0.0, "delta must be finite and >= 0");
    require(positive(d), "d must be positive and finite");
    require(positive(L), "L must be positive and finite");
    require(positive(a), "a must be positive and finite");
    require(positive(T), "T must be positive and finite");
    require(positive(omega0), "omega0 must be positive and finite");
    require(positive(w) && w < a / 2, "w must satisfy 0 < w < a/2");
    require(L / a >= 10.0, "L/a must be at least 10");
    require(cell_points >= 256 && cell_points % 2 == 0, "cell_points must be even and >= 256");
    require(z_points >= 8 && tau_points >= 8, "z_points and tau_points must be >= 8");

    std::vector<std::string> warnings;
    if (adiabaticity() < 10.0) {
        std::ostringstream os;
        os << "adiabaticity T*d*gamma = " << adiabaticity() << " < 10";
        warnings.push_back(os.str());
    }
    return warnings;
}

Scenario Scenario::with_lattice_constant(double a_new) const
{
    Scenario s = *this;
    s.w = w / a * a_new;
    s.a = a_new;
    return s;
}

Scenario preset(std::string_view name)
{
    Scenario s;
    s.lambda_s = 800e-9;
    s.gamma = 1.0 / 30e-9;
    s.L = 1e-3;
    s.a = 0.40 * s.lambda_s;
    s.w = s.a / 10.0;
    if (name == "raman") {
        s.d = 300.0;
        s.T = 3e-9;
        s.delta = 15.0 / s.T;
    } else if (name == "eit") {
        s.d = 30.0;
        s.T = 30e-9;
        s.delta = 0.0;
    } else {
        throw Error(ErrorKind::invalid_input, "unknown preset '" + std::string(name) + "'");
    }
    s.omega0 = 5.5 / s.T;
    return s;
}

namespace {

const char* const scenario_keys[] = {
    "lambda_s_nm", "gamma_inv_ns", "delta_over_invT", "d", "L_mm", "a_nm", "w_over_a",
    "omega0_T_product", "T_ns", "pulse_shape", "cell_points", "z_points", "tau_points",
};

} // namespace

Scenario scenario_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("scenario JSON: ") + e.what());
    }
    require(j.is_object(), "scenario JSON must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : scenario_keys) known = known || item.key() == k;
        require(known, "unknown scenario key '" + item.key() + "'");
    }
    for (const char* k : scenario_keys) require(j.contains(k), std::string("missing scenario key '") + k + "'");

    try {
        Scenario s;
        s.lambda_s = j.at("lambda_s_nm").get<double>() * 1e-9;
        s.gamma = 1.0 / (j.at("gamma_inv_ns").get<double>() * 1e-9);
        s.T = j.at("T_ns").get<double>() * 1e-9;
        s.delta = j.at("delta_over_invT").get<double>() / s.T;
        s.d = j.at("d").get<double>();
        s.L = j.at("L_mm").get<double>() * 1e-3;
        s.a = j.at("a_nm").get<double>() * 1e-9;
        s.w = j.at("w_over_a").get<double>() * s.a;
        s.omega0 = j.at("omega0_T_product").get<double>() / s.T;
        s.pulse_shape = parse_pulse_shape(j.at("pulse_shape").get<std::string>());
        s.cell_points = j.at("cell_points").get<int>();
        s.z_points = j.at("z_points").get<int>();
        s.tau_points = j.at("tau_points").get<int>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("scenario JSON: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_input, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& s)
{
    nlohmann::json j = {
        {"lambda_s_nm", s.lambda_s * 1e9},
        {"gamma_inv_ns", 1e9 / s.gamma},
        {"delta_over_invT", s.delta * s.T},
        {"d", s.d},
        {"L_mm", s.L * 1e3},
        {"a_nm", s.a * 1e9},
        {"w_over_a", s.w / s.a},
        {"omega0_T_product", s.omega0 * s.T},
        {"T_ns", s.T * 1e9},
        {"pulse_shape", std::string(to_string(s.pulse_shape))},
        {"cell_points", s.cell_points},
        {"z_points", s.z_points},
        {"tau_points", s.tau_points},
    };
    return j.dump(2);
}

DerivedParams derive_params(const Scenario& s)
{
    s.validate();
    DerivedParams p{};
    p.k_s = 2.0 * pi / s.lambda_s;
    p.omega_s = speed_of_light * p.k_s;
    p.Gamma = cplx(s.gamma, -s.delta);
    p.d_gamma = s.d * s.gamma;
    p.kappa = std::sqrt(p.d_gamma / s.L);
    p.n_cells = static_cast<long>(std::floor(s.L / s.a));
    p.d_gamma_T = s.adiabaticity();
    p.delta_over_gamma = s.delta / s.gamma;
    p.a_ks_over_pi = s.a * p.k_s / pi;
    return p;
}

CellGrid::CellGrid(double a, int n) : a_(a), n_(n)
{
    require(positive(a), "cell period must be positive");
    require(n >= 256 && n % 2 == 0, "cell grid needs an even number of points >= 256");
    // Periodic composite Simpson: z_n wraps onto z_0, so the end weights merge.
    const double h = a / n;
    weights_.resize(n);
    for (int j = 0; j < n; ++j) weights_[j] = (j % 2 == 0 ? 2.0 : 4.0) * h / 3.0;
}

Modulation Modulation::uniform(const CellGrid& grid)
{
    return Modulation{grid, std::vector<double>(grid.size(), 1.0)};
}

std::vector<double> periodized_gaussian(const CellGrid& grid, double w)
{
    require(positive(w), "modulation width must be positive");
    const double a = grid.period();
    // exp(-x^2) < 1e-16 beyond x = 6.1; add one cell of margin on each side.
    const int images = static_cast<int>(std::ceil(6.1 * w / a)) + 1;

    std::vector<double> m(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double z = grid.z(j);
        double acc = 0.0;
        for (int n = -images; n <= images; ++n) {
            const double x = (z - a / 2 - n * a) / w;
            acc += std::exp(-x * x);
        }
        m[j] = acc;
    }
    const double mean = grid.integrate(m) / a;
    for (double& v : m) v /= mean;
    return m;
}

Modulation modulation(const CellGrid& grid, double a, double w)
{
    require(std::abs(grid.period() - a) <= 1e-12 * a, "grid period does not match lattice constant");
    require(positive(w) && w < a / 2, "modulation width must satisfy 0 < w < a/2");
    return Modulation{grid, periodized_gaussian(grid, w)};
}

Potential potential(const Modulation& m, const DerivedParams& p, double L)
{
    require(positive(L), "L must be positive");
    const cplx scale = 2.0 * cplx(0.0, 1.0) * p.d_gamma / (p.Gamma * L * p.k_s);
    Potential out{m.grid, std::vector<cplx>(m.m.size())};
    for (std::size_t j = 0; j < m.m.size(); ++j) out.v[j] = 1.0 + scale * m.m[j];
    return out;
}

} // namespace latmem
