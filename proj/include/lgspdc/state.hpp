#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgspdc/amplitude.hpp"

namespace lgspdc {

/// Ω = 2πc(1/λ - 1/λ0), exact.
double omega_from_wavelength(double wavelength, double center_wavelength);
double wavelength_from_omega(double omega, double center_wavelength);
/// Largest |Ω| for which both photons pass a rectangular filter of full width `bandwidth`.
double filter_omega_limit(double center_wavelength, double bandwidth);

/// Detuning samples Ω (rad/s) with quadrature weights.
struct OmegaGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    void validate() const;

    /// Gauss–Legendre on [-omega_max, omega_max].
    static OmegaGrid gauss_legendre(int nodes, double omega_max);
    /// Symmetric grid covering center ± half_span in wavelength on both sides.
    static OmegaGrid wavelength_span(double center_wavelength, double half_span, int nodes = 201);
    /// The Ω window where both photons pass a rectangular filter of full width `bandwidth`.
    static OmegaGrid filter_window(double center_wavelength, double bandwidth, int nodes = 64);
    /// Composite Gauss–Legendre on [-omega_max, omega_max].
    static OmegaGrid composite(double omega_max, int panels, int order = 8);
    /// A single sample of unit weight.
    static OmegaGrid single(double omega = 0.0);
};

struct ModePair {
    ModeIndex signal;
    ModeIndex idler;
    auto operator<=>(const ModePair&) const = default;
};

/// Truncated CW biphoton state Σ ∫dΩ C_{s,i}(Ω) |s,Ω⟩|i,-Ω⟩. Only OAM-allowed pairs
/// are stored; every other (signal, idler) entry is exactly zero.
struct BiphotonState {
    std::vector<ModeIndex> signal_modes;  // sorted
    std::vector<ModeIndex> idler_modes;   // sorted
    std::vector<ModePair> pairs;          // sorted
    OmegaGrid grid;
    std::vector<Complex> amplitudes;      // pairs.size() x grid.size(), pair-major
    std::vector<Complex> center;          // amplitudes at Ω = 0, same scale
    double norm = 1.0;                    // scale applied to the raw amplitudes
    double center_wavelength = 810e-9;    // degenerate wavelength

    Complex amplitude(std::size_t pair, std::size_t node) const {
        return amplitudes[pair * grid.size() + node];
    }
    /// Amplitude of an arbitrary pair at a grid node; 0 for pairs not stored.
    Complex at(const ModePair& pair, std::size_t node) const;
    /// Σ_pairs Σ_Ω w |C|².
    double total_weight() const;
    void validate() const;
};

struct StateOptions {
    AmplitudeOptions amplitude;
    unsigned threads = 1;
    bool edge_check = true;
    double edge_threshold = 1e-4;  // of the peak spectral density
};

/// Populates and normalizes the state for `pump`. Throws GridError when the
/// spectral density at either grid edge exceeds edge_threshold of its peak.
BiphotonState build_state(const PumpSpec& pump, const Truncation& truncation, const OmegaGrid& grid,
                          const BeamGeometry& geometry, const CrystalSpec& crystal,
                          const StateOptions& options = {});

/// Keeps only `pairs` and renormalizes. Throws EmptySubspaceError if nothing survives.
BiphotonState project(const BiphotonState& state, std::span<const ModePair> pairs);

/// All pairs of signal_modes x idler_modes.
std::vector<ModePair> product_subspace(std::span<const ModeIndex> signal_modes,
                                       std::span<const ModeIndex> idler_modes);

/// A = ∫dΩ C C† over the stored pairs, scaled to unit trace.
struct SpatialDensityMatrix {
    std::vector<ModePair> basis;
    Eigen::MatrixXcd entries;
};

struct DensityMatrixCheck {
    double hermiticity = 0.0;  // max |A - A†|
    double trace_error = 0.0;  // |Tr A - 1|
    double min_eigenvalue = 0.0;
    bool ok(double herm_tol = 1e-12, double trace_tol = 1e-12, double psd_tol = 1e-10) const {
        return hermiticity <= herm_tol && trace_error <= trace_tol && min_eigenvalue >= -psd_tol;
    }
};

SpatialDensityMatrix spatial_overlap_matrix(const BiphotonState& state);
DensityMatrixCheck check_density_matrix(const Eigen::MatrixXcd& rho);
double purity(const SpatialDensityMatrix& dm);
double purity(const Eigen::MatrixXcd& rho);

/// K = 1/Σλ² over Schmidt coefficients. Must be nonnegative weights.
double schmidt_number_from_weights(std::span<const double> weights);

struct SchmidtOptions {
    bool spectrally_traced = false;  // use the Ω-traced spatial state instead of Ω = 0
};

/// Schmidt number of the state projected onto `subspace` and renormalized.
double schmidt_number_subspace(const BiphotonState& state, std::span<const ModePair> subspace,
                               const SchmidtOptions& options = {});
/// K = 1/Tr(ρ_signal²) over the joint (mode, Ω-node) signal basis.
double schmidt_number_full(const BiphotonState& state);
/// Same at Ω = 0 only.
double schmidt_number_center(const BiphotonState& state);

enum class FilterShape { rectangular, gaussian };

/// Intensity transmission of a filter of full width `bandwidth` (FWHM for gaussian).
double filter_transmission(double wavelength, double center_wavelength, double bandwidth,
                           FilterShape shape);

/// Applies the filter to both arms and renormalizes. Throws DegenerateFilterError
/// if the transmitted norm falls below 1e-12.
BiphotonState apply_spectral_filter(const BiphotonState& state, double bandwidth,
                                    FilterShape shape = FilterShape::rectangular);

struct SweepPoint {
    double bandwidth = 0.0;
    double purity = 0.0;
};

/// Spatial purity of the filtered state for each bandwidth. Rectangular filters are
/// integrated on the exact Ω window both arms pass, gaussian ones over four FWHM.
/// Windows use 8-point panels no wider than `resolution` in wavelength; kernel
/// samples are shared across all bandwidths.
std::vector<SweepPoint> purity_sweep(const PumpSpec& pump, const Truncation& truncation,
                                     const BeamGeometry& geometry, const CrystalSpec& crystal,
                                     std::span<const double> bandwidths,
                                     FilterShape shape = FilterShape::rectangular,
                                     double resolution = 0.25e-9, const StateOptions& options = {});

/// CSV columns p_s,l_s,p_i,l_i,omega,re,im.
void write_state_csv(std::ostream& out, const BiphotonState& state);
/// Versioned little-endian binary dump (magic "LGSPDCST").
void write_state_binary(std::ostream& out, const BiphotonState& state);
BiphotonState read_state_binary(std::istream& in);

}  // namespace lgspdc
