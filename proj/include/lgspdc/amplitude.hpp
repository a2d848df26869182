#pragma once

#include <complex>
#include <cstdlib>
#include <memory>
#include <span>
#include <vector>

#include "lgspdc/dispersion.hpp"
#include "lgspdc/lgmodes.hpp"
#include "lgspdc/specialfn.hpp"

namespace lgspdc {

/// Pump spectrum. CW drops the spectral envelope and pins Ω_i = -Ω_s; a
/// Gaussian pulse of duration t0 multiplies by t0/√π · exp(-t0²(Ω_s+Ω_i)²/4).
struct SpectralModel {
    enum class Kind { cw, pulsed };
    Kind kind = Kind::cw;
    double duration = 0.0;  // t0, seconds

    static SpectralModel cw() { return {}; }
    static SpectralModel pulsed(double t0) { return {Kind::pulsed, t0}; }

    double envelope(Detunings d) const;
    void validate() const;
};

struct PumpComponent {
    ModeIndex mode;
    Complex coefficient;
};

/// Pump field as a superposition of LG modes, Σ|a_n|² = 1.
struct PumpSpec {
    std::vector<PumpComponent> components;
    SpectralModel spectrum;
    double wavelength = 405e-9;  // m

    /// Throws DomainError if empty or not normalised to within `tolerance`.
    void validate(double tolerance = 1e-12) const;
    /// Copy with coefficients rescaled to unit norm.
    PumpSpec normalized() const;
};

struct Truncation {
    int p_max = 10;
    int l_max = 10;

    bool contains(ModeIndex m) const { return m.p >= 0 && m.p <= p_max && std::abs(m.l) <= l_max; }
};

struct AmplitudeRequest {
    ModeIndex pump_mode;
    ModeIndex signal_mode;
    ModeIndex idler_mode;
    Detunings detunings;
    BeamGeometry geometry;
    CrystalSpec crystal;
    SpectralModel spectrum;
};

struct AmplitudeOptions {
    double tolerance = 1e-8;  // relative to ∫|z-integrand| dz
    double absolute_tolerance = 0.0;  // errors below this always pass (amplitudes that vanish)
    Truncation truncation;
    Hyp2f1Options hyp2f1;
    int max_interpolation_nodes = 513;
};

struct AmplitudeResult {
    Complex value;
    double error_estimate = 0.0;  // absolute
    double scale = 0.0;           // ∫|g(z)| dz times the envelope; budget reference
    bool forbidden = false;       // OAM conservation violated; value is exactly 0
};

/// Summation indices of one term of the closed-form amplitude.
struct SummationIndex {
    int u = 0, s = 0, i = 0, n = 0, m = 0, f = 0, v = 0;
};

/// Coefficients of the z-integrand. H, D, B in m²; the exponents are integers
/// for OAM-conserving tuples but are kept as reals to mirror the formula.
struct ZIntegrandCoefficients {
    Complex H, D, B;
    double d = 0.0, h = 0.0, b = 0.0;

    Complex hypergeometric_argument() const { return D * D / (H * B); }
};

/// H, D, B and (d, h, b) at position z for the summation term `idx`. Requires
/// pump l >= 0 and an OAM-conserving tuple; throws DomainError otherwise.
ZIntegrandCoefficients z_coefficients(double z, const AmplitudeRequest& req,
                                      const SummationIndex& idx);

/// e^{izΔ_Ω} D^d / (H^h B^b) · 2F1~(h, b; 1+d; D²/(HB)) for one summation term.
Complex z_integrand(double z, const AmplitudeRequest& req, const SummationIndex& idx);

/// Evaluates closed-form coincidence amplitudes for one crystal/geometry and
/// caches the Ω-dependent quadrature weights, so that spectra of many mode
/// triplets share work. Thread-safe.
class AmplitudeEngine {
public:
    AmplitudeEngine(BeamGeometry geometry, CrystalSpec crystal, AmplitudeOptions options = {});
    ~AmplitudeEngine();
    AmplitudeEngine(const AmplitudeEngine&) = delete;
    AmplitudeEngine& operator=(const AmplitudeEngine&) = delete;

    AmplitudeResult amplitude(ModeIndex pump, ModeIndex signal, ModeIndex idler,
                              Detunings detunings, const SpectralModel& spectrum) const;

    /// Amplitudes of one triplet at every detuning in `detunings`.
    std::vector<AmplitudeResult> spectrum(ModeIndex pump, ModeIndex signal, ModeIndex idler,
                                          std::span<const Detunings> detunings,
                                          const SpectralModel& spectrum) const;

    const BeamGeometry& geometry() const { return geometry_; }
    const CrystalSpec& crystal() const { return crystal_; }
    const AmplitudeOptions& options() const { return options_; }

private:
    struct WeightCache;
    BeamGeometry geometry_;
    CrystalSpec crystal_;
    AmplitudeOptions options_;
    std::unique_ptr<WeightCache> cache_;
};

/// Closed-form coincidence amplitude C^{l,l_s,l_i}_{p,p_s,p_i}(Ω_s, Ω_i).
/// Exactly 0 when l != l_s + l_i. Throws TruncationError for indices beyond
/// the truncation and AccuracyError when the quadrature misses the budget.
AmplitudeResult coincidence_amplitude_detailed(const AmplitudeRequest& req,
                                               const AmplitudeOptions& options = {});

inline Complex coincidence_amplitude(const AmplitudeRequest& req,
                                     const AmplitudeOptions& options = {}) {
    return coincidence_amplitude_detailed(req, options).value;
}

/// Σ_n a_n C_n over the pump components.
Complex amplitude_for_pump(const PumpSpec& pump, ModeIndex signal, ModeIndex idler,
                           Detunings detunings, const BeamGeometry& geometry,
                           const CrystalSpec& crystal, const AmplitudeOptions& options = {});

/// Same, reusing an engine.
Complex amplitude_for_pump(const PumpSpec& pump, ModeIndex signal, ModeIndex idler,
                           Detunings detunings, const AmplitudeEngine& engine);

/// Reduced z-integral for matched Rayleigh lengths and k_p = 2k_s = 2k_i:
///   ∫ dz e^{izΔ_Ω} (a + 2iz)^M / (a - 2iz)^{M+1},  a = k_p w_p²,  M = -N_R/2.
/// Throws PreconditionError when the geometry is not matched to 1e-6 relative
/// and DomainError for odd N_R (which no OAM-conserving triplet can have).
Complex gouy_reduced_amplitude(int relative_mode_number, Detunings detunings,
                               const BeamGeometry& geometry, const CrystalSpec& crystal,
                               double tolerance = 1e-10);

/// Throws PreconditionError unless z_Rp = z_Rs = z_Ri and k_p = 2k_s = 2k_i
/// within `relative_tolerance`.
void require_matched_gouy_geometry(const BeamGeometry& geometry, const CrystalSpec& crystal,
                                   double relative_tolerance = 1e-6);

}  // namespace lgspdc
