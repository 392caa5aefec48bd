#include "latmem/bessel.hpp"

#include <cmath>
#include <limits>

namespace latmem {

using cplx = std::complex<double>;

cplx bessel_j0_series(cplx w)
{
    const cplx x = -0.25 * w * w;
    cplx term = 1.0;
    cplx sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= x / (double(k) * double(k));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && k > std::abs(x)) break;
    }
    return sum;
}

cplx bessel_j0_asymptotic_scaled(cplx w)
{
    if (w.real() < 0) w = -w; // J0 is even; keep |arg w| <= π/2
    const double y = std::abs(w.imag());
    const double quarter_pi = 0.78539816339744830962;

    // P ~ Σ (−1)^j a_{2j}/w^{2j}, Q ~ Σ (−1)^j a_{2j+1}/w^{2j+1}; stop at the smallest term.
    cplx P = 1.0, Q = 0.0;
    cplx t = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200; ++k) {
        const double odd = 2.0 * k + 1.0;
        const cplx next = t * (-(odd * odd)) / (8.0 * (k + 1) * w);
        const double mag = std::abs(next);
        if (mag >= last || mag < 1e-17) break;
        last = mag;
        const int idx = k + 1;
        const double sign = ((idx / 2) % 2 == 0) ? 1.0 : -1.0;
        if (idx % 2 == 0)
            P += sign * next;
        else
            Q += sign * next;
        t = next;
    }

    const cplx I(0.0, 1.0);
    const cplx chi = w - quarter_pi;
    const cplx ep = std::exp(I * chi - y);
    const cplx em = std::exp(-I * chi - y);
    const cplx cos_s = 0.5 * (ep + em);
    const cplx sin_s = (ep - em) / (2.0 * I);
    const double two_over_pi = 0.63661977236758134308;
    return std::sqrt(two_over_pi / w) * (P * cos_s - Q * sin_s);
}

cplx bessel_j0_scaled(cplx w)
{
    if (std::abs(w) <= j0_series_radius) return bessel_j0_series(w) * std::exp(-std::abs(w.imag()));
    return bessel_j0_asymptotic_scaled(w);
}

cplx bessel_j0(cplx w)
{
    return bessel_j0_scaled(w) * std::exp(std::abs(w.imag()));
}

} // namespace latmem
