#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lgspdc/amplitude.hpp"

namespace lgspdc {

/// Target coincidence matrix t[signal, idler] over a set of signal and idler modes.
struct TargetMatrix {
    std::vector<ModeIndex> signal_modes;
    std::vector<ModeIndex> idler_modes;
    Eigen::MatrixXcd entries;  // rows: signal_modes, columns: idler_modes

    /// p = 0 modes l_min..l_max on both sides, all entries zero.
    static TargetMatrix azimuthal(int l_min, int l_max);
    /// Entry (i, j) = 1 iff permutation[i] = j, over p = 0 modes l_min..l_min+n-1.
    static TargetMatrix permutation(int l_min, std::span<const int> permutation);

    Complex& at(int signal_l, int idler_l);
    void validate() const;
};

/// Reads "l_s,l_i,re[,im]" rows (p = 0 modes); the subspace spans the OAM range seen.
TargetMatrix read_target_csv(std::istream& in);

struct SolverOptions {
    double threshold = 0.05;  // fit residual relative to the target norm
    bool throw_on_infeasible = true;
    unsigned threads = 1;
    AmplitudeOptions amplitude;
    /// Pump modes to fit. Empty: one p = 0 mode per anti-diagonal with a nonzero target.
    /// Any p > 0 entry switches to a joint least-squares fit over all listed modes.
    std::vector<ModeIndex> pump_basis;
    double pump_wavelength = 405e-9;  // vacuum, copied into the returned PumpSpec
};

struct AntiDiagonalFit {
    int l = 0;
    Complex coefficient;       // before pump normalization
    double residual = 0.0;     // ||t - a C|| over the nonzero targets on this anti-diagonal
    double asymmetry = 0.0;    // max |C_{s,i} - C_{i,s}| / max |C| over mirrored pairs
    int fitted_entries = 0;
};

struct PumpSolution {
    PumpSpec pump;                        // normalized
    std::vector<AntiDiagonalFit> diagonals;
    Eigen::MatrixXcd realized;            // Σ a C over the target subspace, unnormalized
    double fit_residual = 0.0;            // over nonzero targets, relative to ||t||
    double full_residual = 0.0;           // over every subspace entry, relative to ||t||
    double max_asymmetry = 0.0;
    bool achievable = true;
};

/// Least-squares pump coefficients realizing `target` at Ω = 0 (CW). Fits each
/// anti-diagonal l = l_s + l_i separately against its nonzero target entries.
/// Throws InfeasibleTargetError when the fit residual exceeds options.threshold.
PumpSolution solve_pump_coefficients(const TargetMatrix& target, const BeamGeometry& geometry,
                                     const CrystalSpec& crystal, const SolverOptions& options = {});

/// N_R = N_p - N_s - N_i with N = 2p + |l|.
int relative_mode_number(ModeIndex pump, ModeIndex signal, ModeIndex idler);

struct ModeTriplet {
    ModeIndex pump, signal, idler;
};

struct GouySpectrum {
    ModeTriplet triplet;
    int relative_mode_number = 0;
    std::vector<double> normalized;  // |C(Ω)|² over its peak on the grid
    std::vector<double> reduced;     // same for the reduced one-dimensional integral
    double reduced_deviation = 0.0;  // max |normalized - reduced|
    bool vanishing = false;          // |C| below vanishing_threshold on the whole grid
};

struct GouyReport {
    std::vector<GouySpectrum> spectra;
    double within_class_deviation = 0.0;  // max over pairs sharing N_R
    double across_class_deviation = 0.0;  // min over class pairs of the max pointwise gap
    double reduced_deviation = 0.0;       // max over triplets
    bool passed = true;
};

struct GouyOptions {
    double within_tolerance = 1e-6;
    double across_threshold = 1e-3;
    double amplitude_tolerance = 1e-10;
    /// Relative to |C| of the all-Gaussian triplet at Ω = 0. Spectra that stay
    /// below it are flagged as vanishing and left out of the comparisons.
    double vanishing_threshold = 1e-8;
    unsigned threads = 1;
};

/// Compares peak-normalized CW spectra of the triplets on `omegas`. Requires equal
/// Rayleigh lengths and k_p = 2k_s = 2k_i (PreconditionError otherwise).
GouyReport verify_gouy_spectral_invariance(std::span<const ModeTriplet> triplets,
                                           const BeamGeometry& geometry, const CrystalSpec& crystal,
                                           std::span<const double> omegas,
                                           const GouyOptions& options = {});

}  // namespace lgspdc
