#include "latmem/observables.hpp"

#include <cmath>

namespace latmem {

namespace {

void require_normalized(const BlochMode& mode)
{
    std::vector<cplx> pair(mode.phi.size());
    for (std::size_t j = 0; j < pair.size(); ++j) pair[j] = mode.psi[j] * mode.phi[j];
    const cplx norm = mode.grid.integrate(pair);
    if (std::abs(norm - 1.0) > 1e-8)
        throw Error(ErrorKind::invalid_input, "mode is not normalised (∫ψφ ≠ 1)");
}

} // namespace

cplx group_velocity(const BlochMode& mode)
{
    require_normalized(mode);
    const cplx minus_i(0.0, -1.0);
    std::vector<cplx> f(mode.phi.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = mode.psi[j] * minus_i * mode.dphi[j];
    return speed_of_light / mode.k_s * mode.grid.integrate(f);
}

cplx overlap(const BlochMode& mode, const Modulation& m)
{
    require_normalized(mode);
    if (m.m.size() != mode.phi.size())
        throw Error(ErrorKind::invalid_input, "modulation and mode grids differ");
    std::vector<cplx> f(mode.phi.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = mode.psi[j] * mode.phi[j] * m.m[j];
    return mode.grid.integrate(f);
}

double damping_parameter(double im_k, double d, double gamma, cplx Gamma, double L)
{
    const double ref = (d * gamma / Gamma).real();
    if (ref == 0.0 || !std::isfinite(ref))
        throw Error(ErrorKind::invalid_input, "Re{dγ/Γ} vanishes; damping parameter undefined");
    return im_k * L / ref - 1.0;
}

double reflectivity(const BlochMode& mode)
{
    const cplx I(0.0, 1.0);
    const cplx r1 = mode.k_s * mode.u0;
    const cplx r2 = mode.k * mode.u0 - I * mode.du0;
    const cplx den = r1 + r2;
    if (std::abs(den) < 1e-12 * (std::abs(r1) + std::abs(r2)))
        throw Error(ErrorKind::total_reflection, "r1 + r2 vanishes at the entrance face");
    const double R = std::norm((r1 - r2) / den);
    if (!(R <= 1.0 + 1e-12))
        throw Error(ErrorKind::numerical_failure, "reflectivity exceeds 1");
    return R;
}

ModeObservables compute_observables(const BlochMode& mode, const Modulation& m, const Scenario& s,
                                    const DerivedParams& p)
{
    ModeObservables o;
    o.v_g = group_velocity(mode);
    o.alpha = overlap(mode, m);
    o.beta = 1.0 / o.v_g - 1.0 / speed_of_light;
    o.im_k = mode.im_k;
    o.mu = damping_parameter(mode.im_k, s.d, s.gamma, p.Gamma, s.L);
    o.R = reflectivity(mode);
    return o;
}

} // namespace latmem
