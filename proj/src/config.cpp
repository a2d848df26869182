#include "lgspdc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace lgspdc {

namespace {

constexpr double kPi = std::numbers::pi;

struct Unit {
    std::string_view name;
    Dimension dimension;
    double factor;
};

// clang-format off
constexpr Unit kUnits[] = {
    {"m", Dimension::length, 1.0}, {"cm", Dimension::length, 1e-2}, {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6}, {"µm", Dimension::length, 1e-6}, {"nm", Dimension::length, 1e-9},
    {"pm", Dimension::length, 1e-12},
    {"s", Dimension::time, 1.0}, {"ms", Dimension::time, 1e-3}, {"us", Dimension::time, 1e-6},
    {"µs", Dimension::time, 1e-6}, {"ns", Dimension::time, 1e-9}, {"ps", Dimension::time, 1e-12},
    {"fs", Dimension::time, 1e-15},
    {"rad/m", Dimension::wavenumber, 1.0}, {"1/m", Dimension::wavenumber, 1.0},
    {"rad/mm", Dimension::wavenumber, 1e3}, {"1/mm", Dimension::wavenumber, 1e3},
    {"rad/um", Dimension::wavenumber, 1e6}, {"1/um", Dimension::wavenumber, 1e6},
    {"m/s", Dimension::velocity, 1.0}, {"km/s", Dimension::velocity, 1e3},
    {"s^2/m", Dimension::gvd, 1.0}, {"ps^2/m", Dimension::gvd, 1e-24}, {"fs^2/mm", Dimension::gvd, 1e-27},
    {"fs^2/m", Dimension::gvd, 1e-30}, {"ps^2/km", Dimension::gvd, 1e-27},
    {"rad/s", Dimension::angular_frequency, 1.0}, {"Hz", Dimension::angular_frequency, 2.0 * kPi},
    {"kHz", Dimension::angular_frequency, 2e3 * kPi}, {"MHz", Dimension::angular_frequency, 2e6 * kPi},
    {"GHz", Dimension::angular_frequency, 2e9 * kPi}, {"THz", Dimension::angular_frequency, 2e12 * kPi},
    {"m^2", Dimension::area, 1.0}, {"um^2", Dimension::area, 1e-12}, {"µm^2", Dimension::area, 1e-12},
    {"nm^2", Dimension::area, 1e-18},
    {"m^-2", Dimension::inverse_area, 1.0}, {"um^-2", Dimension::inverse_area, 1e12},
    {"µm^-2", Dimension::inverse_area, 1e12},
    {"degC", Dimension::temperature, 1.0}, {"°C", Dimension::temperature, 1.0},
};
// clang-format on

const char* dimension_name(Dimension d) {
    switch (d) {
        case Dimension::length: return "length";
        case Dimension::time: return "time";
        case Dimension::wavenumber: return "wavenumber";
        case Dimension::velocity: return "velocity";
        case Dimension::gvd: return "group-velocity dispersion";
        case Dimension::angular_frequency: return "frequency";
        case Dimension::area: return "area";
        case Dimension::inverse_area: return "inverse area";
        case Dimension::temperature: return "temperature";
    }
    return "quantity";
}

struct Split {
    double value;
    std::string_view unit;
};

Split split_quantity(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || !std::isfinite(value)) throw ConfigError("expected a number with a unit, got '" + std::string(text) + "'");
    const std::string_view unit = trim(text.substr(static_cast<std::size_t>(end - text.data())));
    if (unit.empty()) throw ConfigError("missing unit in '" + std::string(text) + "'");
    return {value, unit};
}

double convert(const Split& q, std::string_view text, Dimension dimension) {
    for (const Unit& u : kUnits) {
        if (u.name != q.unit) continue;
        if (u.dimension != dimension) {
            throw ConfigError("'" + std::string(text) + "' is a " + dimension_name(u.dimension) + ", expected a " +
                              dimension_name(dimension));
        }
        return q.value * u.factor;
    }
    throw ConfigError("unknown unit '" + std::string(q.unit) + "'");
}

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

// Rethrows with the line of `node` unless the error already carries one.
template <class F>
auto at_line(const YAML::Node& node, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        if (e.line > 0) throw;
        throw ConfigError(e.what(), line_of(node));
    } catch (const YAML::Exception& e) {
        throw ConfigError(e.msg, line_of(node));
    } catch (const Error& e) {
        throw ConfigError(e.what(), line_of(node));
    }
}

// A mapping whose keys are checked against a fixed set.
class Block {
public:
    Block(const YAML::Node& node, std::string name, std::initializer_list<std::string_view> keys)
        : node_(node), name_(std::move(name)) {
        if (!node.IsMap()) throw ConfigError("'" + name_ + "' must be a mapping", line_of(node));
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw ConfigError("unknown key '" + key + "' in '" + name_ + "'", line_of(kv.first));
            }
        }
    }

    bool has(const char* key) const { return static_cast<bool>(node_[key]); }
    YAML::Node operator[](const char* key) const { return node_[key]; }
    int line() const { return line_of(node_); }

    YAML::Node require(const char* key) const {
        const YAML::Node n = node_[key];
        if (!n) throw ConfigError("'" + name_ + "' is missing '" + key + "'", line_of(node_));
        return n;
    }

    double quantity(const char* key, Dimension d) const {
        const YAML::Node n = require(key);
        return at_line(n, [&] { return parse_quantity(scalar(n), d); });
    }
    double quantity(const char* key, Dimension d, double fallback) const { return has(key) ? quantity(key, d) : fallback; }

    template <class T>
    T value(const char* key) const {
        const YAML::Node n = require(key);
        return at_line(n, [&] { return n.as<T>(); });
    }
    template <class T>
    T value(const char* key, T fallback) const { return has(key) ? value<T>(key) : fallback; }

    std::string scalar(const YAML::Node& n) const {
        if (!n.IsScalar()) throw ConfigError("expected a scalar", line_of(n));
        return n.Scalar();
    }

private:
    YAML::Node node_;
    std::string name_;
};

std::vector<YAML::Node> sequence(const YAML::Node& node, const char* what) {
    if (!node.IsSequence()) throw ConfigError(std::string("'") + what + "' must be a list", line_of(node));
    std::vector<YAML::Node> out;
    for (const auto& n : node) out.push_back(n);
    return out;
}

ModeIndex mode_pair(const YAML::Node& node) {
    const auto v = at_line(node, [&] { return node.as<std::vector<int>>(); });
    if (v.size() != 2) throw ConfigError("a mode is written [p, l]", line_of(node));
    if (v[0] < 0) throw ConfigError("radial number p must be nonnegative", line_of(node));
    return {v[0], v[1]};
}

ModeTriplet triplet(const YAML::Node& node) {
    const auto v = at_line(node, [&] { return node.as<std::vector<int>>(); });
    if (v.size() != 6) throw ConfigError("a mode tuple is written [p, l, p_s, l_s, p_i, l_i]", line_of(node));
    if (v[0] < 0 || v[2] < 0 || v[4] < 0) throw ConfigError("radial numbers must be nonnegative", line_of(node));
    return {{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}};
}

std::vector<double> detunings(const YAML::Node& node, double center) {
    std::vector<double> out;
    for (const auto& n : sequence(node, "detunings")) {
        out.push_back(at_line(n, [&] { return parse_detuning(n.as<std::string>(), center); }));
    }
    return out;
}

// All OAM-conserving tuples with every p <= p_max and every |l| <= l_max.
std::vector<ModeTriplet> conserving_tuples(int p_max, int l_max) {
    std::vector<ModeTriplet> out;
    for (int p = 0; p <= p_max; ++p)
        for (int l = -l_max; l <= l_max; ++l)
            for (int ps = 0; ps <= p_max; ++ps)
                for (int ls = -l_max; ls <= l_max; ++ls)
                    for (int pi = 0; pi <= p_max; ++pi) {
                        const int li = l - ls;
                        if (std::abs(li) <= l_max) out.push_back({{p, l}, {ps, ls}, {pi, li}});
                    }
    return out;
}

SellmeierModel index_model(const YAML::Node& node, const std::string& name) {
    const Block b(node, "index_models." + name,
                  {"constant", "terms", "ir_coefficient", "valid_from", "valid_to", "dn_dT", "reference_temperature"});
    SellmeierModel m;
    m.constant = b.value<double>("constant");
    for (const auto& t : sequence(b.require("terms"), "terms")) {
        const Block tb(t, "terms", {"strength", "pole", "form"});
        SellmeierModel::Term term;
        term.strength = tb.value<double>("strength");
        term.pole = tb.quantity("pole", Dimension::area) * 1e12;  // µm²
        const std::string form = tb.value<std::string>("form", "lambda2");
        if (form == "lambda2") {
            term.lambda_squared_numerator = true;
        } else if (form == "inverse") {
            term.lambda_squared_numerator = false;
        } else {
            throw ConfigError("term form must be 'lambda2' or 'inverse'", line_of(tb["form"]));
        }
        m.terms.push_back(term);
    }
    m.ir_coefficient = b.quantity("ir_coefficient", Dimension::inverse_area, 0.0) * 1e-12;  // µm⁻²
    m.min_wavelength = b.quantity("valid_from", Dimension::length);
    m.max_wavelength = b.quantity("valid_to", Dimension::length);
    if (!(m.min_wavelength < m.max_wavelength)) throw ConfigError("empty validity window", b.line());
    m.dn_dT = b.value<double>("dn_dT", 0.0);
    m.reference_temperature = b.quantity("reference_temperature", Dimension::temperature, 20.0);
    return m;
}

struct BeamEntry {
    BeamDispersion beam;
    std::optional<double> wavelength;
};

BeamEntry beam_entry(const YAML::Node& node, const char* name, const std::map<std::string, SellmeierModel>& models,
                     std::optional<double> temperature) {
    const Block b(node, std::string("crystal.") + name,
                  {"wavelength", "index_model", "wavenumber", "group_velocity", "gvd"});
    BeamEntry e;
    if (b.has("index_model")) {
        if (b.has("wavenumber") || b.has("group_velocity") || b.has("gvd")) {
            throw ConfigError(std::string("'") + name + "' gives both an index model and explicit dispersion", b.line());
        }
        const std::string model = b.value<std::string>("index_model");
        const auto it = models.find(model);
        if (it == models.end()) throw ConfigError("unknown index model '" + model + "'", line_of(b["index_model"]));
        e.wavelength = b.quantity("wavelength", Dimension::length);
        e.beam = at_line(b["index_model"], [&] { return sellmeier_wavenumber(*e.wavelength, it->second, temperature).beam; });
        return e;
    }
    e.beam.wavenumber = b.quantity("wavenumber", Dimension::wavenumber);
    e.beam.group_velocity = b.quantity("group_velocity", Dimension::velocity);
    e.beam.gvd = b.quantity("gvd", Dimension::gvd, 0.0);
    if (b.has("wavelength")) e.wavelength = b.quantity("wavelength", Dimension::length);
    return e;
}

std::optional<double> parse_crystal(const YAML::Node& node, CrystalSpec& crystal) {
    const Block b(node, "crystal",
                  {"length", "temperature", "poling_period", "phase_matching_tolerance", "index_models", "pump", "signal", "idler"});
    crystal.length = b.quantity("length", Dimension::length);
    std::optional<double> temperature;
    if (b.has("temperature")) temperature = b.quantity("temperature", Dimension::temperature);
    std::map<std::string, SellmeierModel> models;
    if (b.has("index_models")) {
        const YAML::Node m = b["index_models"];
        if (!m.IsMap()) throw ConfigError("'index_models' must be a mapping", line_of(m));
        for (const auto& kv : m) {
            const std::string name = kv.first.as<std::string>();
            models.emplace(name, index_model(kv.second, name));
        }
    }
    const BeamEntry pump = beam_entry(b.require("pump"), "pump", models, temperature);
    crystal.pump = pump.beam;
    crystal.signal = beam_entry(b.require("signal"), "signal", models, temperature).beam;
    crystal.idler = beam_entry(b.require("idler"), "idler", models, temperature).beam;

    const std::string poling = b.has("poling_period") ? b.value<std::string>("poling_period") : "none";
    if (poling == "auto") {
        const double mismatch = crystal.pump.wavenumber - crystal.signal.wavenumber - crystal.idler.wavenumber;
        if (!(std::abs(mismatch) > 0.0)) throw ConfigError("'auto' poling needs a nonzero mismatch", line_of(b["poling_period"]));
        crystal.poling_period = 2.0 * kPi / mismatch;
    } else if (poling != "none") {
        crystal.poling_period = at_line(b["poling_period"], [&] { return parse_quantity(poling, Dimension::length); });
    }
    const double tolerance = b.quantity("phase_matching_tolerance", Dimension::wavenumber, 1.0);
    at_line(node, [&] {
        crystal.validate(tolerance);
        return 0;
    });
    return pump.wavelength;
}

void parse_geometry(const YAML::Node& node, BeamGeometry& g) {
    const Block b(node, "geometry", {"pump_waist", "signal_waist", "idler_waist"});
    g.waist_pump = b.quantity("pump_waist", Dimension::length);
    g.waist_signal = b.quantity("signal_waist", Dimension::length);
    g.waist_idler = b.quantity("idler_waist", Dimension::length);
    at_line(node, [&] {
        g.validate();
        return 0;
    });
}

void parse_pump(const YAML::Node& node, RunConfig& c) {
    const Block b(node, "pump", {"wavelength", "duration", "normalize", "components", "from_target", "threshold"});
    PumpSpec pump;
    pump.wavelength = b.quantity("wavelength", Dimension::length, c.pump.wavelength);
    if (b.has("duration")) pump.spectrum = SpectralModel::pulsed(b.quantity("duration", Dimension::time));
    if (b.has("components") == b.has("from_target")) {
        throw ConfigError("pump needs exactly one of 'components' or 'from_target'", b.line());
    }
    if (b.has("components")) {
        for (const auto& n : sequence(b["components"], "components")) {
            const Block cb(n, "pump.components", {"p", "l", "re", "im"});
            const int p = cb.value<int>("p");
            if (p < 0) throw ConfigError("radial number p must be nonnegative", cb.line());
            pump.components.push_back({{p, cb.value<int>("l")}, {cb.value<double>("re"), cb.value<double>("im", 0.0)}});
        }
        if (pump.components.empty()) throw ConfigError("pump has no components", b.line());
        if (b.value<bool>("normalize", true)) {
            pump = at_line(node, [&] { return pump.normalized(); });
        } else {
            at_line(node, [&] {
                pump.validate(1e-9);
                return 0;
            });
        }
    } else {
        std::filesystem::path path = b.value<std::string>("from_target");
        if (path.is_relative()) path = c.directory / path;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open target '" + path.string() + "'", line_of(b["from_target"]));
        SolverOptions opts;
        opts.threshold = b.value<double>("threshold", 0.05);
        opts.pump_wavelength = pump.wavelength;
        opts.amplitude = c.amplitude;
        opts.threads = c.threads;
        const TargetMatrix target = at_line(b["from_target"], [&] { return read_target_csv(in); });
        const SpectralModel spectrum = pump.spectrum;
        pump = solve_pump_coefficients(target, c.geometry, c.crystal, opts).pump;
        pump.spectrum = spectrum;
    }
    c.pump = pump;
}

void parse_spectral(const YAML::Node& node, SpectralConfig& s) {
    const Block b(node, "spectral", {"center_wavelength", "half_span", "nodes", "filter", "resolution", "edge_check"});
    s.center_wavelength = b.quantity("center_wavelength", Dimension::length, s.center_wavelength);
    s.half_span = b.quantity("half_span", Dimension::length, s.half_span);
    s.nodes = b.value<int>("nodes", s.nodes);
    if (s.nodes < 1) throw ConfigError("'nodes' must be positive", line_of(b["nodes"]));
    s.resolution = b.quantity("resolution", Dimension::length, s.resolution);
    s.edge_check = b.value<bool>("edge_check", s.edge_check);
    if (b.has("filter")) {
        const Block f(b["filter"], "spectral.filter", {"bandwidth", "shape"});
        s.filter_bandwidth = f.quantity("bandwidth", Dimension::length);
        const std::string shape = f.value<std::string>("shape", "rectangular");
        if (shape == "rectangular") {
            s.filter_shape = FilterShape::rectangular;
        } else if (shape == "gaussian") {
            s.filter_shape = FilterShape::gaussian;
        } else {
            throw ConfigError("filter shape must be 'rectangular' or 'gaussian'", line_of(f["shape"]));
        }
    }
}

void parse_commands(const YAML::Node& root, RunConfig& c) {
    const double center = c.spectral.center_wavelength;
    if (const YAML::Node n = root["amplitude"]) {
        const Block b(n, "amplitude", {"tuples", "detunings"});
        for (const auto& t : sequence(b.require("tuples"), "tuples")) c.amplitude_cmd.tuples.push_back(triplet(t));
        c.amplitude_cmd.omegas = b.has("detunings") ? detunings(b["detunings"], center) : std::vector<double>{0.0};
    }
    if (const YAML::Node n = root["spiral_bandwidth"]) {
        const Block b(n, "spiral_bandwidth", {"l_min", "l_max", "p_max", "detuning"});
        auto& s = c.spiral_cmd;
        s.l_min = b.value<int>("l_min", s.l_min);
        s.l_max = b.value<int>("l_max", s.l_max);
        s.p_max = b.value<int>("p_max", s.p_max);
        if (s.l_min > s.l_max || s.p_max < 0) throw ConfigError("empty spiral-bandwidth range", b.line());
        if (b.has("detuning")) s.omega = at_line(b["detuning"], [&] { return parse_detuning(b.value<std::string>("detuning"), center); });
    }
    if (const YAML::Node n = root["schmidt"]) {
        const Block b(n, "schmidt", {"l_min", "l_max", "full"});
        auto& s = c.schmidt_cmd;
        s.l_min = b.value<int>("l_min", s.l_min);
        s.l_max = b.value<int>("l_max", s.l_max);
        s.full = b.value<bool>("full", s.full);
        if (s.l_min > s.l_max) throw ConfigError("empty Schmidt subspace", b.line());
    }
    if (const YAML::Node n = root["purity_sweep"]) {
        const Block b(n, "purity_sweep", {"bandwidths"});
        for (const auto& w : sequence(b.require("bandwidths"), "bandwidths")) {
            c.sweep_cmd.bandwidths.push_back(at_line(w, [&] { return parse_quantity(w.as<std::string>(), Dimension::length); }));
        }
    }
    if (const YAML::Node n = root["engineer"]) {
        const Block b(n, "engineer", {"target", "threshold", "pump_basis"});
        auto& e = c.engineer_cmd;
        if (b.has("target")) {
            e.target = b.value<std::string>("target");
            if (e.target.is_relative()) e.target = c.directory / e.target;
        }
        e.threshold = b.value<double>("threshold", e.threshold);
        if (b.has("pump_basis")) {
            for (const auto& m : sequence(b["pump_basis"], "pump_basis")) e.pump_basis.push_back(mode_pair(m));
        }
    }
    if (const YAML::Node n = root["validate_oracle"]) {
        const Block b(n, "validate_oracle",
                      {"tuples", "all_tuples", "detunings", "relative", "absolute", "grid", "tolerance", "max_refinements"});
        auto& v = c.validate_cmd;
        if (b.has("tuples")) {
            for (const auto& t : sequence(b["tuples"], "tuples")) v.tuples.push_back(triplet(t));
        }
        if (b.has("all_tuples")) {
            const Block a(b["all_tuples"], "validate_oracle.all_tuples", {"p_max", "l_max"});
            const auto more = conserving_tuples(a.value<int>("p_max"), a.value<int>("l_max"));
            v.tuples.insert(v.tuples.end(), more.begin(), more.end());
        }
        if (v.tuples.empty()) throw ConfigError("validate_oracle needs 'tuples' or 'all_tuples'", b.line());
        v.omegas = b.has("detunings") ? detunings(b["detunings"], center) : std::vector<double>{0.0};
        v.relative = b.value<double>("relative", v.relative);
        v.absolute = b.value<double>("absolute", v.absolute);
        v.oracle.tolerance = b.value<double>("tolerance", v.oracle.tolerance);
        v.oracle.max_refinements = b.value<int>("max_refinements", v.oracle.max_refinements);
        if (b.has("grid")) {
            const Block g(b["grid"], "validate_oracle.grid", {"family", "radial_nodes", "angular_nodes", "cutoff_widths"});
            auto& grid = v.oracle.grid;
            const std::string family = g.value<std::string>("family", "legendre");
            if (family == "legendre") {
                grid.family = QuadratureGrid::Radial::legendre;
            } else if (family == "laguerre") {
                grid.family = QuadratureGrid::Radial::laguerre;
            } else {
                throw ConfigError("grid family must be 'legendre' or 'laguerre'", line_of(g["family"]));
            }
            grid.radial_nodes = g.value<int>("radial_nodes", grid.radial_nodes);
            grid.angular_nodes = g.value<int>("angular_nodes", grid.angular_nodes);
            grid.cutoff_widths = g.value<double>("cutoff_widths", grid.cutoff_widths);
            at_line(b["grid"], [&] {
                grid.validate();
                return 0;
            });
        }
    }
    if (const YAML::Node n = root["gouy_check"]) {
        const Block b(n, "gouy_check", {"triplets", "detunings", "span", "within_tolerance", "across_threshold"});
        auto& g = c.gouy_cmd;
        for (const auto& t : sequence(b.require("triplets"), "triplets")) g.triplets.push_back(triplet(t));
        if (b.has("detunings") == b.has("span")) throw ConfigError("gouy_check needs exactly one of 'detunings' or 'span'", b.line());
        if (b.has("detunings")) {
            g.omegas = detunings(b["detunings"], center);
        } else {
            const Block s(b["span"], "gouy_check.span", {"half_width", "nodes"});
            const double half = at_line(s.require("half_width"), [&] { return parse_detuning(s.value<std::string>("half_width"), center); });
            const int nodes = s.value<int>("nodes", 41);
            if (nodes < 2) throw ConfigError("span needs at least 2 nodes", s.line());
            for (int k = 0; k < nodes; ++k) g.omegas.push_back(-std::abs(half) + 2.0 * std::abs(half) * k / (nodes - 1));
        }
        g.options.within_tolerance = b.value<double>("within_tolerance", g.options.within_tolerance);
        g.options.across_threshold = b.value<double>("across_threshold", g.options.across_threshold);
    }
}

YAML::Node load_yaml(std::string_view text) {
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
    }
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dimension) {
    return convert(split_quantity(text), text, dimension);
}

double parse_detuning(std::string_view text, double center_wavelength) {
    const Split q = split_quantity(text);
    for (const Unit& u : kUnits) {
        if (u.name != q.unit) continue;
        if (u.dimension == Dimension::angular_frequency) return q.value * u.factor;
        if (u.dimension == Dimension::length) return omega_from_wavelength(center_wavelength + q.value * u.factor, center_wavelength);
        throw ConfigError("detuning '" + std::string(text) + "' must be a frequency or a wavelength offset");
    }
    throw ConfigError("unknown unit '" + std::string(q.unit) + "'");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& directory) {
    const YAML::Node root = load_yaml(text);
    const Block b(root, "configuration",
                  {"crystal", "geometry", "pump", "truncation", "spectral", "accuracy", "threads", "amplitude",
                   "spiral_bandwidth", "schmidt", "purity_sweep", "engineer", "validate_oracle", "gouy_check"});
    RunConfig c;
    c.source = std::string(text);
    c.directory = directory;
    const std::optional<double> pump_wavelength = parse_crystal(b.require("crystal"), c.crystal);
    if (pump_wavelength) c.pump.wavelength = *pump_wavelength;
    parse_geometry(b.require("geometry"), c.geometry);
    if (b.has("accuracy")) {
        const Block a(b["accuracy"], "accuracy", {"tolerance", "absolute_tolerance", "max_interpolation_nodes"});
        c.amplitude.tolerance = a.value<double>("tolerance", c.amplitude.tolerance);
        c.amplitude.absolute_tolerance = a.value<double>("absolute_tolerance", c.amplitude.absolute_tolerance);
        c.amplitude.max_interpolation_nodes = a.value<int>("max_interpolation_nodes", c.amplitude.max_interpolation_nodes);
    }
    if (b.has("truncation")) {
        const Block t(b["truncation"], "truncation", {"p_max", "l_max"});
        c.truncation.p_max = t.value<int>("p_max", c.truncation.p_max);
        c.truncation.l_max = t.value<int>("l_max", c.truncation.l_max);
        if (c.truncation.p_max < 0 || c.truncation.l_max < 0) throw ConfigError("truncation bounds must be nonnegative", t.line());
    }
    c.amplitude.truncation = {std::max(c.truncation.p_max, 10), std::max(c.truncation.l_max, 10)};
    c.threads = b.value<unsigned>("threads", 1u);
    if (b.has("spectral")) parse_spectral(b["spectral"], c.spectral);
    if (b.has("pump")) {
        parse_pump(b["pump"], c);
    } else {
        c.pump.components = {{{0, 0}, 1.0}};
    }
    parse_commands(root, c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

void override_pump(RunConfig& config, std::string_view text) {
    const YAML::Node root = load_yaml(text);
    const Block b(root, "pump file", {"pump"});
    parse_pump(b.require("pump"), config);
    config.source += "\n";
    config.source += text;
}

std::string emit_pump_yaml(const PumpSpec& pump) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap << YAML::Key << "pump" << YAML::Value << YAML::BeginMap;
    // SI units at 17 digits read back bit-for-bit.
    auto si = [](double x, const char* unit) {
        std::ostringstream os;
        os.precision(17);
        os << x << ' ' << unit;
        return os.str();
    };
    out << YAML::Key << "wavelength" << YAML::Value << si(pump.wavelength, "m");
    if (pump.spectrum.kind == SpectralModel::Kind::pulsed) {
        out << YAML::Key << "duration" << YAML::Value << si(pump.spectrum.duration, "s");
    }
    out << YAML::Key << "normalize" << YAML::Value << false;
    out << YAML::Key << "components" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : pump.components) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "p" << YAML::Value << c.mode.p << YAML::Key << "l"
            << YAML::Value << c.mode.l << YAML::Key << "re" << YAML::Value << c.coefficient.real() << YAML::Key << "im"
            << YAML::Value << c.coefficient.imag() << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace lgspdc
