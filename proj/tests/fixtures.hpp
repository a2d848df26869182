#pragma once

#include <numbers>

#include "lgspdc/amplitude.hpp"
#include "lgspdc/dispersion.hpp"

namespace fixtures {

// KTP principal indices (λ in µm): n² = A + Σ E/(λ² - F).
inline lgspdc::SellmeierModel ktp_ny() {
    lgspdc::SellmeierModel m;
    m.constant = 3.45018;
    m.terms = {{0.04341, 0.04597, false}, {16.98825, 39.43799, false}};
    m.min_wavelength = 0.39e-6;
    m.max_wavelength = 3.6e-6;
    return m;
}

inline lgspdc::SellmeierModel ktp_nz() {
    lgspdc::SellmeierModel m;
    m.constant = 4.59423;
    m.terms = {{0.06206, 0.04763, false}, {110.80672, 86.12171, false}};
    m.min_wavelength = 0.39e-6;
    m.max_wavelength = 3.6e-6;
    return m;
}

// 15 mm type-II ppKTP, 405 nm -> 810 nm (signal y, idler z), poled for Δk = 0.
inline lgspdc::CrystalSpec ppktp(double length = 15e-3) {
    lgspdc::CrystalSpec c;
    c.length = length;
    c.pump = lgspdc::sellmeier_wavenumber(405e-9, ktp_ny()).beam;
    c.signal = lgspdc::sellmeier_wavenumber(810e-9, ktp_ny()).beam;
    c.idler = lgspdc::sellmeier_wavenumber(810e-9, ktp_nz()).beam;
    c.poling_period =
        2.0 * std::numbers::pi / (c.pump.wavenumber - c.signal.wavenumber - c.idler.wavenumber);
    return c;
}

inline lgspdc::BeamGeometry reference_geometry() { return {25e-6, 33e-6, 33e-6}; }

// k_p = 2k_s = 2k_i and w_s = w_i = √2 w_p: all Rayleigh lengths equal.
inline lgspdc::CrystalSpec matched_crystal() {
    lgspdc::CrystalSpec c;
    c.length = 15e-3;
    c.pump = {2.0 * 14.0e6, 1.42e8, 8.8e-25};
    c.signal = {14.0e6, 1.66e8, 2.0e-25};
    c.idler = {14.0e6, 1.57e8, 2.7e-25};
    return c;
}

inline lgspdc::BeamGeometry matched_geometry() {
    return {25e-6, std::numbers::sqrt2 * 25e-6, std::numbers::sqrt2 * 25e-6};
}

inline double omega_from_wavelength_offset(double center, double offset) {
    const double c = lgspdc::kSpeedOfLight;
    return 2.0 * std::numbers::pi * c * (1.0 / (center + offset) - 1.0 / center);
}

}  // namespace fixtures
