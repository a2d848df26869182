#include "lgspdc/lgmodes.hpp"

#include <cmath>
#include <numbers>

#include "lgspdc/errors.hpp"

namespace lgspdc {

namespace {

Complex i_power(int l) {
    switch (((l % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

double ln_factorial(int n) { return std::lgamma(n + 1.0); }

// T_u^{p,l} / i^l, which is real.
double t_real(int u, ModeIndex mode, double waist) {
    if (mode.p < 0) throw DomainError("radial index p must be non-negative");
    if (u < 0 || u > mode.p) throw DomainError("t_coefficient requires 0 <= u <= p");
    const int p = mode.p;
    const int al = std::abs(mode.l);
    const double log_mag = 0.5 * (ln_factorial(p) + ln_factorial(p + al) - std::log(std::numbers::pi)) +
                           (2 * u + al + 1) * std::log(waist / std::numbers::sqrt2) -
                           ln_factorial(p - u) - ln_factorial(al + u) - ln_factorial(u);
    const double sign = ((p + u) % 2 == 0) ? 1.0 : -1.0;
    return sign * std::exp(log_mag);
}

}  // namespace

Complex t_coefficient(int u, ModeIndex mode, double waist) {
    return t_real(u, mode, waist) * i_power(mode.l);
}

Complex lg_amplitude(double rho, double phi, ModeIndex mode, double waist) {
    const int al = std::abs(mode.l);
    const double r2 = rho * rho;
    double radial = 0.0;
    double rpow = std::pow(rho, al);
    for (int u = 0; u <= mode.p; ++u) {
        radial += t_real(u, mode, waist) * rpow;
        rpow *= r2;
    }
    radial *= std::exp(-0.25 * r2 * waist * waist);
    // Multiplying by the unit i^l only permutes components, so |LG| does not depend on the sign of l.
    return radial * std::polar(1.0, mode.l * phi) * i_power(mode.l);
}

}  // namespace lgspdc
