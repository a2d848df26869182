#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "lgspdc/cli.hpp"
#include "lgspdc/config.hpp"

using namespace lgspdc;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(LGSPDC_SOURCE_DIR) / "configs";

std::string read(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string csv(const Table& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

const char* kMinimal = R"(crystal:
  length: 15 mm
  pump: {wavenumber: 2.8e7 rad/m, group_velocity: 1.42e8 m/s, gvd: 8.8e-25 s^2/m}
  signal: {wavenumber: 1.4e7 rad/m, group_velocity: 1.66e8 m/s}
  idler: {wavenumber: 1.4e7 rad/m, group_velocity: 1.57e8 m/s}
geometry:
  pump_waist: 25 um
  signal_waist: 33 um
  idler_waist: 33 um
)";

int line_of_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line;
    }
    return -1;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "lgspdc");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("unit-suffixed quantities") {
    CHECK(parse_quantity("15 mm", Dimension::length) == doctest::Approx(15e-3));
    CHECK(parse_quantity("405nm", Dimension::length) == doctest::Approx(405e-9));
    CHECK(parse_quantity("33 µm", Dimension::length) == doctest::Approx(33e-6));
    CHECK(parse_quantity("1 ps", Dimension::time) == doctest::Approx(1e-12));
    CHECK(parse_quantity("100 GHz", Dimension::angular_frequency) == doctest::Approx(2e11 * std::numbers::pi));
    CHECK(parse_quantity("0.04597 um^2", Dimension::area) == doctest::Approx(0.04597e-12));
    CHECK(parse_quantity("200 fs^2/mm", Dimension::gvd) == doctest::Approx(200e-27));
    CHECK_THROWS_AS(parse_quantity("15", Dimension::length), ConfigError);
    CHECK_THROWS_AS(parse_quantity("15 furlongs", Dimension::length), ConfigError);
    CHECK_THROWS_AS(parse_quantity("15 ps", Dimension::length), ConfigError);
    CHECK_THROWS_AS(parse_quantity("mm", Dimension::length), ConfigError);

    CHECK(parse_detuning("0 nm", 810e-9) == 0.0);
    CHECK(parse_detuning("1 THz", 810e-9) == doctest::Approx(2e12 * std::numbers::pi));
    CHECK(parse_detuning("0.3 nm", 810e-9) == omega_from_wavelength(810.3e-9, 810e-9));
    CHECK_THROWS_AS(parse_detuning("1 ps", 810e-9), ConfigError);
}

TEST_CASE("schema errors carry line numbers") {
    CHECK(line_of_error(std::string(kMinimal) + "threads: 2\nbogus: 1\n") == 11);
    std::string bad = kMinimal;
    bad.replace(bad.find("33 um"), 5, "33");
    CHECK(line_of_error(bad) == 8);
    CHECK(line_of_error(std::string(kMinimal) + "truncation: {p_max: 2, l_mx: 3}\n") == 10);
    CHECK(line_of_error("crystal: [1, 2\n") > 0);
    // Central phase mismatch of 1e4 rad/m without poling.
    std::string mismatched = kMinimal;
    mismatched.replace(mismatched.find("2.8e7"), 5, "2.801e7");
    CHECK(line_of_error(mismatched) > 0);
}

TEST_CASE("index models reproduce the library dispersion") {
    const RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    const CrystalSpec ref = fixtures::ppktp();
    CHECK(c.crystal.length == ref.length);
    // Poles pass through SI (µm² -> m² -> µm²), so only the last bits may differ.
    CHECK(c.crystal.pump.wavenumber == doctest::Approx(ref.pump.wavenumber).epsilon(1e-12));
    CHECK(c.crystal.signal.group_velocity == doctest::Approx(ref.signal.group_velocity).epsilon(1e-12));
    CHECK(c.crystal.idler.gvd == doctest::Approx(ref.idler.gvd).epsilon(1e-9));
    CHECK(*c.crystal.poling_period == doctest::Approx(*ref.poling_period).epsilon(1e-9));
    CHECK(c.geometry.waist_signal == doctest::Approx(33e-6).epsilon(1e-15));
    CHECK(c.pump.components.size() == 2);
}

TEST_CASE("pump blocks round-trip exactly") {
    RunConfig c = parse_config(kMinimal);
    PumpSpec p;
    p.components = {{{0, 1}, {0.6, 0.1}}, {{1, -3}, {-0.2, 0.7}}};
    p = p.normalized();
    p.spectrum = SpectralModel::pulsed(1.3e-12);
    p.wavelength = 404.7e-9;
    override_pump(c, emit_pump_yaml(p));
    REQUIRE(c.pump.components.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(c.pump.components[k].mode == p.components[k].mode);
        CHECK(c.pump.components[k].coefficient == p.components[k].coefficient);
    }
    CHECK(c.pump.wavelength == p.wavelength);
    CHECK(c.pump.spectrum.duration == p.spectrum.duration);
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("amplitude command") {
    RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    c.amplitude_cmd.tuples = {{{0, 2}, {0, 1}, {0, 0}}, {{0, 2}, {0, 1}, {0, 1}}};
    c.amplitude_cmd.omegas = {0.0};
    const Table t = cmd_amplitude(c);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][7] == "0");
    CHECK(t.rows[0][8] == "0");
    CHECK(t.rows[0].back() == "forbidden");

    AmplitudeRequest r;
    r.pump_mode = {0, 2};
    r.signal_mode = {0, 1};
    r.idler_mode = {0, 1};
    r.geometry = c.geometry;
    r.crystal = c.crystal;
    const AmplitudeResult direct = coincidence_amplitude_detailed(r, c.amplitude);
    CHECK(t.rows[1][7] == format_number(direct.value.real()));
    CHECK(t.rows[1][8] == format_number(direct.value.imag()));
    CHECK(t.exit_code == kExitSuccess);
}

TEST_CASE("output is independent of the thread count") {
    RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    c.amplitude_cmd.tuples.clear();
    for (int l = -2; l <= 2; ++l)
        for (int ls = -3; ls <= 3; ++ls)
            for (int ps = 0; ps <= 1; ++ps)
                for (int pi = 0; pi <= 1; ++pi) {
                    if (c.amplitude_cmd.tuples.size() < 100) c.amplitude_cmd.tuples.push_back({{0, l}, {ps, ls}, {pi, l - ls}});
                }
    REQUIRE(c.amplitude_cmd.tuples.size() == 100);
    c.threads = 1;
    const std::string serial = csv(cmd_amplitude(c));
    c.threads = 4;
    CHECK(csv(cmd_amplitude(c)) == serial);
    CHECK(csv(cmd_amplitude(c)) == serial);
    c.threads = 3;
    CHECK(csv(cmd_spiral_bandwidth(c)) == [&] {
        RunConfig d = c;
        d.threads = 1;
        return csv(cmd_spiral_bandwidth(d));
    }());
}

TEST_CASE("spiral bandwidth bars") {
    RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    c.spiral_cmd = {0, 3, 0, 0.0};
    const Table psi4 = cmd_spiral_bandwidth(c);
    double on = 0.0, off = 0.0;
    for (const auto& row : psi4.rows) {
        const int ls = std::stoi(row[1]), li = std::stoi(row[3]);
        const double w = std::stod(row[7]);
        if ((ls ^ li) == 1 && (ls + li == 1 || ls + li == 5)) {
            CHECK(w == doctest::Approx(0.25).epsilon(0.02));
            on += w;
        } else {
            off += w;
        }
    }
    CHECK(on > 0.99);

    // Single Gaussian pump: bars symmetric under l -> -l.
    c.pump.components = {{{0, 0}, 1.0}};
    c.spiral_cmd = {-3, 3, 0, 0.0};
    const Table g = cmd_spiral_bandwidth(c);
    for (const auto& row : g.rows) {
        const int ls = std::stoi(row[1]), li = std::stoi(row[3]);
        const auto mirror = std::find_if(g.rows.begin(), g.rows.end(), [&](const auto& r) {
            return std::stoi(r[1]) == -ls && std::stoi(r[3]) == -li;
        });
        REQUIRE(mirror != g.rows.end());
        CHECK(std::stod((*mirror)[6]) == doctest::Approx(std::stod(row[6])).epsilon(1e-12));
    }
}

TEST_CASE("engineer command and round trip") {
    RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    std::string yaml;
    const Table t = cmd_engineer(c, yaml);
    CHECK(t.exit_code == kExitSuccess);
    CHECK(t.summary["fit_residual"].get<double>() < 0.02);

    RunConfig again = load_config(kConfigs / "ppktp_405.yaml");
    override_pump(again, yaml);
    again.spiral_cmd = {0, 3, 0, 0.0};
    const Table bars = cmd_spiral_bandwidth(again);
    // Target 1 at four entries, 0 elsewhere. Best overall scale of the realized bars.
    double tr = 0.0, rr = 0.0;
    std::vector<std::pair<double, double>> entries;
    for (const auto& row : bars.rows) {
        const int ls = std::stoi(row[1]), li = std::stoi(row[3]);
        const bool target = (ls == 0 && li == 1) || (ls == 1 && li == 0) || (ls == 2 && li == 3) || (ls == 3 && li == 2);
        const double r = std::stod(row[4]);
        entries.push_back({target ? 1.0 : 0.0, r});
        tr += (target ? 1.0 : 0.0) * r;
        rr += r * r;
    }
    double residual = 0.0;
    for (auto [t, r] : entries) residual += std::pow(t - tr / rr * r, 2);
    CHECK(std::sqrt(residual) / 2.0 <= t.summary["full_residual"].get<double>() + 1e-9);

    c.engineer_cmd.target = kConfigs / "targets" / "infeasible.csv";
    CHECK(cmd_engineer(c, yaml).exit_code == kExitInfeasible);
}

TEST_CASE("validate-oracle command") {
    RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    c.validate_cmd.tuples = {{{0, 1}, {0, 1}, {0, 0}}, {{0, 1}, {0, 1}, {0, 1}}, {{1, 0}, {0, 1}, {0, -1}}};
    c.validate_cmd.omegas = {0.0, omega_from_wavelength(810.3e-9, 810e-9)};
    const Table ok = cmd_validate_oracle(c);
    CHECK(ok.exit_code == kExitSuccess);
    CHECK(ok.rows[2].back() == "forbidden");
    CHECK(ok.rows[2][7] == "0");
    CHECK(ok.rows[2][9] == "0");

    c.validate_cmd.oracle.grid.radial_nodes = 8;
    c.validate_cmd.oracle.grid.angular_nodes = 8;
    c.validate_cmd.oracle.max_refinements = 0;
    const Table coarse = cmd_validate_oracle(c);
    CHECK(coarse.exit_code == kExitAccuracy);
    CHECK(coarse.summary["accuracy_failures"].get<int>() > 0);
}

TEST_CASE("purity sweep command") {
    RunConfig c = load_config(kConfigs / "ppktp_405.yaml");
    c.pump.components = {{{0, 0}, 1.0}};
    c.truncation = {0, 4};
    c.sweep_cmd.bandwidths = {0.01e-9, 0.5e-9, 2e-9};
    const Table t = cmd_purity_sweep(c);
    CHECK(t.summary["monotone_non_increasing"].get<bool>());
    CHECK(std::stod(t.rows[0][2]) > 0.999);
    CHECK(std::stod(t.rows[2][2]) < std::stod(t.rows[1][2]));
}

TEST_CASE("gouy-check command") {
    const RunConfig c = load_config(kConfigs / "gouy_matched.yaml");
    const Table t = cmd_gouy_check(c);
    CHECK(t.exit_code == kExitSuccess);
    CHECK(t.summary["within_class_deviation"].get<double>() <= 1e-6);
    CHECK(t.summary["across_class_deviation"].get<double>() > 1e-3);

    RunConfig reference = load_config(kConfigs / "ppktp_405.yaml");
    reference.gouy_cmd = c.gouy_cmd;
    CHECK_THROWS_AS(cmd_gouy_check(reference), PreconditionError);
}

TEST_CASE("command-line exit codes and outputs") {
    const std::string gouy = (kConfigs / "gouy_matched.yaml").string();
    const std::string ppktp = (kConfigs / "ppktp_405.yaml").string();
    std::string text;
    CHECK(run({"gouy-check", "--config", gouy}, &text) == 0);
    CHECK(text.rfind("p,l,p_s,l_s,p_i,l_i,relative_mode_number", 0) == 0);
    CHECK(run({"gouy-check"}) == kExitConfig);
    CHECK(run({"frobnicate", "--config", gouy}) == kExitConfig);
    CHECK(run({"gouy-check", "--config", gouy, "--tolerance", "-1"}) == kExitConfig);
    CHECK(run({"spiral-bandwidth", "--config", gouy}) == 0);
    CHECK(run({"engineer", "--config", ppktp, "--target", (kConfigs / "targets" / "infeasible.csv").string()}) ==
          kExitInfeasible);

    const auto dir = std::filesystem::temp_directory_path() / "lgspdc_cli_test";
    std::filesystem::create_directories(dir);
    const std::string out = (dir / "gouy.csv").string();
    CHECK(run({"gouy-check", "--config", gouy, "--out", out, "--threads", "2"}) == 0);
    const std::string first = read(out);
    CHECK(run({"gouy-check", "--config", gouy, "--out", out, "--threads", "1"}) == 0);
    CHECK(read(out) == first);
    const auto manifest = nlohmann::json::parse(read(dir / "gouy.json"));
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(read(gouy))));
    CHECK(manifest["config_hash"] == std::string("fnv1a64:") + hash);
    CHECK(manifest["summary"]["passed"] == true);
    CHECK(manifest["rows"] == 205);
    std::filesystem::remove_all(dir);
}
