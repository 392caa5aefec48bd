#pragma once

#include "latmem/bloch.hpp"

namespace latmem {

struct ModeObservables {
    cplx v_g;      // m/s
    cplx alpha;
    cplx beta;     // 1/v_g − 1/c, s/m
    double mu = 0.0;
    double R = 0.0;
    double im_k = 0.0;
};

/// v_g = (c/k_s)·∫₀ᵃ ψ (−i ∂_z φ) dz
cplx group_velocity(const BlochMode& mode);

/// α = ∫₀ᵃ ψ φ m dz
cplx overlap(const BlochMode& mode, const Modulation& m);

/// Normalised departure of Im k from the uniform-medium value Re{dγ/(ΓL)}.
double damping_parameter(double im_k, double d, double gamma, cplx Gamma, double L);

/// Entrance-face reflectivity from continuity of the carrier and its derivative.
double reflectivity(const BlochMode& mode);

ModeObservables compute_observables(const BlochMode& mode, const Modulation& m, const Scenario& s,
                                    const DerivedParams& p);

} // namespace latmem
