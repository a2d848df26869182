#pragma once

#include <compare>
#include <complex>
#include <cstdlib>

namespace lgspdc {

using Complex = std::complex<double>;

/// Laguerre–Gaussian mode label: radial number p >= 0 and OAM number l.
struct ModeIndex {
    int p = 0;
    int l = 0;

    /// Combined mode number N = 2p + |l|.
    int order() const { return 2 * p + (l < 0 ? -l : l); }

    auto operator<=>(const ModeIndex&) const = default;
};

/// Expansion coefficient T_u^{p,l} of the momentum-space LG mode, so that
/// LG_p^l(ρ,φ) = e^{-ρ²w²/4} e^{ilφ} Σ_{u=0}^{p} T_u^{p,l} ρ^{2u+|l|}.
/// Throws DomainError unless 0 <= u <= p.
Complex t_coefficient(int u, ModeIndex mode, double waist);

/// Momentum-space LG amplitude at the waist plane, normalised so that
/// ∫∫ |LG|² ρ dρ dφ = 1. ρ in rad/m.
Complex lg_amplitude(double rho, double phi, ModeIndex mode, double waist);

}  // namespace lgspdc
