#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lgspdc/amplitude.hpp"
#include "lgspdc/engineering.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/oracle.hpp"
#include "lgspdc/state.hpp"

namespace lgspdc {

/// Schema or unit error in a run configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
    int line;
};

enum class Dimension {
    length,
    time,
    wavenumber,         // rad/m
    velocity,           // m/s
    gvd,                // s²/m
    angular_frequency,  // rad/s; Hz-type units are cyclic and get 2π
    area,               // m²
    inverse_area,       // 1/m²
    temperature,        // °C
};

/// Parses "<number> <unit>" into SI (°C for temperature). Throws ConfigError on
/// a missing or unknown unit, or a unit of the wrong dimension.
double parse_quantity(std::string_view text, Dimension dimension);

/// Either a frequency ("100 GHz", "1e12 rad/s") or a signal wavelength offset
/// from `center_wavelength` ("0.3 nm"). Returns Ω in rad/s.
double parse_detuning(std::string_view text, double center_wavelength);

struct SpectralConfig {
    double center_wavelength = 810e-9;
    double half_span = 10e-9;  // ± in wavelength
    int nodes = 201;
    std::optional<double> filter_bandwidth;
    FilterShape filter_shape = FilterShape::rectangular;
    double resolution = 0.25e-9;
    bool edge_check = false;
};

struct AmplitudeCommand {
    std::vector<ModeTriplet> tuples;
    std::vector<double> omegas;
};

struct SpiralCommand {
    int l_min = -5, l_max = 5;
    int p_max = 0;  // signal and idler radial numbers 0..p_max
    double omega = 0.0;
};

struct SchmidtCommand {
    int l_min = 0, l_max = 3;  // p = 0 subspace for the subspace Schmidt number
    bool full = true;          // also build the state over the spectral grid
};

struct SweepCommand {
    std::vector<double> bandwidths;
};

struct EngineerCommand {
    std::filesystem::path target;
    double threshold = 0.05;
    std::vector<ModeIndex> pump_basis;
};

struct ValidateCommand {
    std::vector<ModeTriplet> tuples;
    std::vector<double> omegas;
    double relative = 1e-4;
    double absolute = 1e-8;  // relative to |C| of the all-Gaussian triplet at Ω = 0
    OracleOptions oracle;
};

struct GouyCommand {
    std::vector<ModeTriplet> triplets;
    std::vector<double> omegas;
    GouyOptions options;
};

struct RunConfig {
    CrystalSpec crystal;
    BeamGeometry geometry;
    PumpSpec pump;
    Truncation truncation{2, 8};
    SpectralConfig spectral;
    AmplitudeOptions amplitude;
    unsigned threads = 1;

    AmplitudeCommand amplitude_cmd;
    SpiralCommand spiral_cmd;
    SchmidtCommand schmidt_cmd;
    SweepCommand sweep_cmd;
    EngineerCommand engineer_cmd;
    ValidateCommand validate_cmd;
    GouyCommand gouy_cmd;

    std::string source;  // raw text, hashed into the run manifest
    std::filesystem::path directory;  // relative paths resolve against it
};

/// Parses a YAML run configuration. Unknown keys, missing units and malformed
/// values raise ConfigError with the offending line.
RunConfig parse_config(std::string_view text, const std::filesystem::path& directory = {});
RunConfig load_config(const std::filesystem::path& path);

/// Replaces the pump with the `pump:` block of another YAML document.
void override_pump(RunConfig& config, std::string_view text);

/// `pump:` block that override_pump and parse_config read back exactly.
std::string emit_pump_yaml(const PumpSpec& pump);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace lgspdc
