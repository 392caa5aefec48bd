#pragma once

#include <complex>

namespace latmem {

/// Radius at which the complex J0 switches from power series to the Hankel
/// asymptotic expansion.
inline constexpr double j0_series_radius = 12.0;

/// J0(w)·e^{−|Im w|}: bounded for every complex w, so large arguments that
/// would overflow J0 itself can be combined with other exponentials first.
std::complex<double> bessel_j0_scaled(std::complex<double> w);

std::complex<double> bessel_j0(std::complex<double> w);

/// Individual branches, exposed for seam validation.
std::complex<double> bessel_j0_series(std::complex<double> w);
std::complex<double> bessel_j0_asymptotic_scaled(std::complex<double> w);

} // namespace latmem
