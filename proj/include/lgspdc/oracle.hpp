#pragma once

#include <span>
#include <vector>

#include "lgspdc/amplitude.hpp"
#include "lgspdc/state.hpp"

namespace lgspdc {

/// Grid for the brute-force overlap integral over (ρ_s, ρ_i, Δφ).
struct QuadratureGrid {
    enum class Radial { legendre, laguerre };
    Radial family = Radial::legendre;
    int radial_nodes = 96;    // per radial axis
    int angular_nodes = 128;  // uniform nodes in Δφ
    double cutoff_widths = 8.0;  // R = cutoff_widths · max(2/w)

    static constexpr int kMinRadialNodes = 8;
    static constexpr int kMinAngularNodes = 8;

    /// Throws DomainError when node counts or the radial cutoff are too small.
    void validate() const;
    /// Next grid in the refinement sequence (1.5x nodes on every axis).
    QuadratureGrid refined() const;
};

struct OracleOptions {
    QuadratureGrid grid;
    double tolerance = 1e-8;  // relative to ∫|integrand|
    int max_refinements = 3;
    unsigned threads = 1;
};

struct OracleResult {
    Complex value;
    double error_estimate = 0.0;  // |difference between the last two grids|
    double scale = 0.0;           // ∫|integrand| on the final grid
    bool forbidden = false;
    QuadratureGrid grid;          // grid that produced `value`
};

/// Overlap integral of the phase-matching function with the three LG modes
/// by direct quadrature. The absolute angle and z are integrated analytically.
/// Throws AccuracyError if refinement does not settle within the tolerance.
OracleResult brute_force_amplitude(const AmplitudeRequest& req, const OracleOptions& options = {});

/// Same for several detunings of one triplet; the mode products are shared.
std::vector<OracleResult> brute_force_spectrum(ModeIndex pump, ModeIndex signal, ModeIndex idler,
                                               std::span<const Detunings> detunings,
                                               const BeamGeometry& geometry,
                                               const CrystalSpec& crystal,
                                               const SpectralModel& spectrum,
                                               const OracleOptions& options = {});

/// One grid, no refinement. Returns the values and writes ∫|integrand| per detuning.
std::vector<Complex> overlap_on_grid(ModeIndex pump, ModeIndex signal, ModeIndex idler,
                                     std::span<const Detunings> detunings,
                                     const BeamGeometry& geometry, const CrystalSpec& crystal,
                                     const QuadratureGrid& grid, std::vector<double>& abs_integral,
                                     unsigned threads = 1);

/// Grid for the untruncated two-photon field Ψ(q_s, q_i; Ω) = pump(q_s + q_i) · L sinc(κL/2).
struct ContinuumGrid {
    int radial_nodes = 64;
    int angular_nodes = 64;  // Δφ samples; also the number of resolved OAM harmonics
    double cutoff_widths = 8.0;
    unsigned threads = 1;
};

/// 1/Tr(ρ_signal²) over the joint (transverse momentum, Ω node) signal space, computed
/// from Ψ directly with no mode truncation. The Ω nodes count as discrete states.
double continuum_schmidt_number(const PumpSpec& pump, const BeamGeometry& geometry,
                                const CrystalSpec& crystal, const OmegaGrid& grid,
                                const ContinuumGrid& options = {});

/// Tr(ρ_q²) of the Ω-traced spatial state, from Ψ directly.
double continuum_spatial_purity(const PumpSpec& pump, const BeamGeometry& geometry,
                                const CrystalSpec& crystal, const OmegaGrid& grid,
                                const ContinuumGrid& options = {});

}  // namespace lgspdc
