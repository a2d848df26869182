#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace lgspdc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Dispersion data of one beam at its central frequency, SI units.
struct BeamDispersion {
    double wavenumber = 0.0;      // rad/m, inside the crystal
    double group_velocity = 0.0;  // m/s
    double gvd = 0.0;             // s^2/m
};

/// Crystal length plus pump/signal/idler dispersion. Internally strict SI.
struct CrystalSpec {
    double length = 0.0;  // m
    BeamDispersion pump, signal, idler;
    std::optional<double> poling_period;  // m

    /// k_p - k_s - k_i - 2π/Λ (rad/m); zero for perfect central phase matching.
    double central_mismatch() const;

    /// Throws DomainError on non-positive length, wavenumber or group velocity,
    /// or when |central_mismatch()| exceeds `phase_matching_tolerance`.
    void validate(double phase_matching_tolerance = 1.0) const;

    /// Crystal with signal and idler roles exchanged.
    CrystalSpec swapped() const;
};

struct RayleighLengths {
    double pump, signal, idler;
};

/// Beam waists (m) at the crystal centre.
struct BeamGeometry {
    double waist_pump = 0.0;
    double waist_signal = 0.0;
    double waist_idler = 0.0;

    void validate() const;
    /// z_R = k w^2 / 2 per beam.
    RayleighLengths rayleigh_lengths(const CrystalSpec& crystal) const;
    BeamGeometry swapped() const { return {waist_pump, waist_idler, waist_signal}; }
};

/// Frequency detunings Ω from the central frequencies, rad/s.
struct Detunings {
    double signal = 0.0;
    double idler = 0.0;

    /// Continuous-wave pump: Ω_i = -Ω_s.
    static Detunings cw(double omega) { return {omega, -omega}; }
};

/// Receives human-readable warnings, e.g. detunings outside the narrow-band regime.
using WarningSink = std::function<void(std::string_view)>;

/// Spectral phase mismatch Δ_Ω (rad/m): first- and second-order dispersion of
/// pump, signal and idler around their central frequencies.
double delta_omega(double omega_signal, double omega_idler, const CrystalSpec& crystal);

/// As above, warning through `sink` when |Ω| >= 0.2 ω0 for either photon.
double delta_omega(double omega_signal, double omega_idler, const CrystalSpec& crystal,
                   double center_omega_signal, double center_omega_idler,
                   const WarningSink& sink);

inline double delta_omega(Detunings d, const CrystalSpec& crystal) {
    return delta_omega(d.signal, d.idler, crystal);
}

/// Transverse wavevector in polar form (ρ in rad/m, φ in rad).
struct TransverseMomentum {
    double rho = 0.0;
    double phi = 0.0;
};

/// Longitudinal phase mismatch Δk_z (rad/m) in the paraxial approximation.
double phase_mismatch_kz(TransverseMomentum signal, TransverseMomentum idler,
                         Detunings detunings, const CrystalSpec& crystal);

/// n(λ) as a function of vacuum wavelength in metres.
using IndexModel = std::function<double(double)>;

/// Sellmeier-type index model, λ in micrometres:
///   n² = A + Σ_j B_j λ²/(λ² - C_j) + Σ_j E_j/(λ² - F_j) - D λ²
/// with an optional linear temperature coefficient.
struct SellmeierModel {
    struct Term {
        double strength = 0.0;   // B_j or E_j
        double pole = 0.0;       // C_j or F_j, µm²
        bool lambda_squared_numerator = true;
    };
    double constant = 1.0;
    std::vector<Term> terms;
    double ir_coefficient = 0.0;  // D, µm⁻²
    double min_wavelength = 0.0;  // m
    double max_wavelength = 0.0;  // m
    double dn_dT = 0.0;           // 1/K
    double reference_temperature = 20.0;  // °C

    /// Throws RangeError outside [min_wavelength, max_wavelength].
    double index(double wavelength, std::optional<double> temperature = {}) const;
};

struct DispersionSample {
    double index = 0.0;
    BeamDispersion beam;
};

/// k, u_g and GVD at `wavelength` from an arbitrary index model, by central
/// finite differences in angular frequency with step relative_step·ω0.
DispersionSample dispersion_from_index(const IndexModel& n_of_lambda, double wavelength,
                                       double relative_step = 2e-4);

/// k = 2π n(λ)/λ plus u_g and GVD from a Sellmeier set.
DispersionSample sellmeier_wavenumber(double wavelength, const SellmeierModel& model,
                                      std::optional<double> temperature = {},
                                      double relative_step = 2e-4);

}  // namespace lgspdc
