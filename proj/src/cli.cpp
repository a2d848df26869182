#include "lgspdc/cli.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "CLI11.hpp"
#include "lgspdc/parallel.hpp"

namespace lgspdc {

namespace {

std::vector<std::string> triplet_cells(const ModeTriplet& t) {
    return {std::to_string(t.pump.p), std::to_string(t.pump.l), std::to_string(t.signal.p),
            std::to_string(t.signal.l), std::to_string(t.idler.p), std::to_string(t.idler.l)};
}

const std::vector<std::string> kTripletColumns = {"p", "l", "p_s", "l_s", "p_i", "l_i"};

std::vector<std::string> with_triplet(std::vector<std::string> tail) {
    std::vector<std::string> out = kTripletColumns;
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

std::vector<ModeIndex> azimuthal_modes(int l_min, int l_max) {
    std::vector<ModeIndex> out;
    for (int l = l_min; l <= l_max; ++l) out.push_back({0, l});
    return out;
}

StateOptions state_options(const RunConfig& c) {
    StateOptions o;
    o.amplitude = c.amplitude;
    o.threads = c.threads;
    o.edge_check = c.spectral.edge_check;
    return o;
}

// Ω grid of the spectral block: the rectangular filter window when one is set,
// otherwise the symmetric span (filtered afterwards for gaussian filters).
OmegaGrid spectral_grid(const SpectralConfig& s) {
    if (s.filter_bandwidth && s.filter_shape == FilterShape::rectangular) {
        const int panels = std::max(2, static_cast<int>(std::ceil(*s.filter_bandwidth / s.resolution)));
        return OmegaGrid::composite(filter_omega_limit(s.center_wavelength, *s.filter_bandwidth), panels);
    }
    return OmegaGrid::wavelength_span(s.center_wavelength, s.half_span, s.nodes);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
        out << '\n';
    }
}

Table cmd_amplitude(const RunConfig& c) {
    const auto& cmd = c.amplitude_cmd;
    if (cmd.tuples.empty()) throw ConfigError("no 'amplitude' block with tuples in the configuration");
    const AmplitudeEngine engine(c.geometry, c.crystal, c.amplitude);
    std::vector<Detunings> det;
    for (double w : cmd.omegas) det.push_back(Detunings::cw(w));

    struct Outcome {
        std::vector<AmplitudeResult> values;
        std::string failure;
    };
    std::vector<Outcome> results(cmd.tuples.size());
    parallel_for(cmd.tuples.size(), c.threads, [&](std::size_t k) {
        const ModeTriplet& t = cmd.tuples[k];
        try {
            results[k].values = engine.spectrum(t.pump, t.signal, t.idler, det, c.pump.spectrum);
        } catch (const AccuracyError& e) {
            results[k].failure = e.what();
        }
    });

    Table table;
    table.columns = with_triplet({"omega", "re", "im", "abs2", "error_estimate", "status"});
    double worst = 0.0;
    int failures = 0;
    for (std::size_t k = 0; k < cmd.tuples.size(); ++k) {
        for (std::size_t j = 0; j < det.size(); ++j) {
            auto row = triplet_cells(cmd.tuples[k]);
            row.push_back(format_number(cmd.omegas[j]));
            if (!results[k].failure.empty()) {
                row.insert(row.end(), {"nan", "nan", "nan", "nan", "accuracy"});
                ++failures;
            } else {
                const AmplitudeResult& r = results[k].values[j];
                row.insert(row.end(), {format_number(r.value.real()), format_number(r.value.imag()),
                                       format_number(std::norm(r.value)), format_number(r.error_estimate),
                                       r.forbidden ? "forbidden" : "ok"});
                if (r.scale > 0.0) worst = std::max(worst, r.error_estimate / r.scale);
            }
            table.rows.push_back(std::move(row));
        }
    }
    table.summary = {{"max_relative_error_estimate", worst}, {"accuracy_failures", failures},
                     {"tolerance", c.amplitude.tolerance}};
    if (failures > 0) table.exit_code = kExitAccuracy;
    return table;
}

Table cmd_spiral_bandwidth(const RunConfig& c) {
    const auto& cmd = c.spiral_cmd;
    const AmplitudeEngine engine(c.geometry, c.crystal, c.amplitude);
    std::vector<ModePair> pairs;
    for (int ls = cmd.l_min; ls <= cmd.l_max; ++ls)
        for (int li = cmd.l_min; li <= cmd.l_max; ++li)
            for (int ps = 0; ps <= cmd.p_max; ++ps)
                for (int pi = 0; pi <= cmd.p_max; ++pi) pairs.push_back({{ps, ls}, {pi, li}});
    std::vector<Complex> values(pairs.size());
    parallel_for(pairs.size(), c.threads, [&](std::size_t k) {
        values[k] = amplitude_for_pump(c.pump, pairs[k].signal, pairs[k].idler, Detunings::cw(cmd.omega), engine);
    });
    double total = 0.0;
    for (const Complex& v : values) total += std::norm(v);

    Table table;
    table.columns = {"p_s", "l_s", "p_i", "l_i", "re", "im", "abs2", "weight"};
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [s, i] = pairs[k];
        table.rows.push_back({std::to_string(s.p), std::to_string(s.l), std::to_string(i.p), std::to_string(i.l),
                              format_number(values[k].real()), format_number(values[k].imag()),
                              format_number(std::norm(values[k])),
                              format_number(total > 0.0 ? std::norm(values[k]) / total : 0.0)});
    }
    table.summary = {{"omega", cmd.omega}, {"total_abs2", total}, {"pairs", pairs.size()}};
    return table;
}

Table cmd_schmidt(const RunConfig& c) {
    const auto& cmd = c.schmidt_cmd;
    const StateOptions opts = state_options(c);
    const std::vector<ModeIndex> modes = azimuthal_modes(cmd.l_min, cmd.l_max);
    const std::vector<ModePair> subspace = product_subspace(modes, modes);

    Table table;
    table.columns = {"quantity", "value"};
    auto add = [&](const char* name, double v) {
        table.rows.push_back({name, format_number(v)});
        table.summary[name] = v;
    };
    const BiphotonState center = build_state(c.pump, c.truncation, OmegaGrid::single(), c.geometry, c.crystal, opts);
    add("schmidt_subspace_center", schmidt_number_subspace(center, subspace));
    add("schmidt_center", schmidt_number_center(center));
    if (cmd.full) {
        BiphotonState state =
            build_state(c.pump, c.truncation, spectral_grid(c.spectral), c.geometry, c.crystal, opts);
        if (c.spectral.filter_bandwidth && c.spectral.filter_shape == FilterShape::gaussian) {
            state = apply_spectral_filter(state, *c.spectral.filter_bandwidth, FilterShape::gaussian);
        }
        add("schmidt_full", schmidt_number_full(state));
        add("purity", purity(spatial_overlap_matrix(state)));
        add("schmidt_subspace_traced", schmidt_number_subspace(state, subspace, {true}));
        add("purity_subspace", purity(spatial_overlap_matrix(project(state, subspace))));
        add("omega_nodes", static_cast<double>(state.grid.size()));
        add("mode_pairs", static_cast<double>(state.pairs.size()));
    }
    table.summary["truncation"] = {{"p_max", c.truncation.p_max}, {"l_max", c.truncation.l_max}};
    return table;
}

Table cmd_purity_sweep(const RunConfig& c) {
    const auto& bw = c.sweep_cmd.bandwidths;
    if (bw.empty()) throw ConfigError("no 'purity_sweep' block with bandwidths in the configuration");
    const auto points = purity_sweep(c.pump, c.truncation, c.geometry, c.crystal, bw, c.spectral.filter_shape,
                                     c.spectral.resolution, state_options(c));
    Table table;
    table.columns = {"bandwidth", "bandwidth_nm", "purity"};
    std::vector<SweepPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.bandwidth < b.bandwidth; });
    bool monotone = true;
    for (std::size_t k = 1; k < sorted.size(); ++k) monotone = monotone && sorted[k].purity <= sorted[k - 1].purity;
    for (const SweepPoint& p : points) {
        table.rows.push_back({format_number(p.bandwidth), format_number(p.bandwidth * 1e9), format_number(p.purity)});
    }
    table.summary = {{"monotone_non_increasing", monotone},
                     {"shape", c.spectral.filter_shape == FilterShape::rectangular ? "rectangular" : "gaussian"},
                     {"resolution", c.spectral.resolution}};
    return table;
}

Table cmd_engineer(const RunConfig& c, std::string& pump_yaml) {
    if (c.engineer_cmd.target.empty()) throw ConfigError("engineer needs a target CSV");
    std::ifstream in(c.engineer_cmd.target);
    if (!in) throw ConfigError("cannot open target '" + c.engineer_cmd.target.string() + "'");
    const TargetMatrix target = read_target_csv(in);
    SolverOptions opts;
    opts.threshold = c.engineer_cmd.threshold;
    opts.throw_on_infeasible = false;
    opts.threads = c.threads;
    opts.amplitude = c.amplitude;
    opts.pump_basis = c.engineer_cmd.pump_basis;
    opts.pump_wavelength = c.pump.wavelength;
    const PumpSolution sol = solve_pump_coefficients(target, c.geometry, c.crystal, opts);
    pump_yaml = emit_pump_yaml(sol.pump);

    // Realized matrix rescaled to the target norm, for side-by-side comparison.
    const double scale = sol.realized.norm() > 0.0 ? target.entries.norm() / sol.realized.norm() : 0.0;
    Table table;
    table.columns = {"l_s", "l_i", "target_re", "target_im", "realized_re", "realized_im"};
    for (std::size_t a = 0; a < target.signal_modes.size(); ++a) {
        for (std::size_t b = 0; b < target.idler_modes.size(); ++b) {
            const Complex t = target.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            const Complex r = scale * sol.realized(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            table.rows.push_back({std::to_string(target.signal_modes[a].l), std::to_string(target.idler_modes[b].l),
                                  format_number(t.real()), format_number(t.imag()), format_number(r.real()),
                                  format_number(r.imag())});
        }
    }
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& comp : sol.pump.components) {
        coeffs.push_back({{"p", comp.mode.p}, {"l", comp.mode.l}, {"re", comp.coefficient.real()}, {"im", comp.coefficient.imag()}});
    }
    table.summary = {{"achievable", sol.achievable}, {"fit_residual", sol.fit_residual},
                     {"full_residual", sol.full_residual}, {"max_asymmetry", sol.max_asymmetry},
                     {"threshold", opts.threshold}, {"pump", coeffs}};
    if (!sol.achievable) table.exit_code = kExitInfeasible;
    return table;
}

Table cmd_validate_oracle(const RunConfig& c) {
    const auto& cmd = c.validate_cmd;
    if (cmd.tuples.empty()) throw ConfigError("no 'validate_oracle' block in the configuration");
    const AmplitudeEngine engine(c.geometry, c.crystal, c.amplitude);
    std::vector<Detunings> det;
    for (double w : cmd.omegas) det.push_back(Detunings::cw(w));
    const double reference = std::abs(engine.amplitude({0, 0}, {0, 0}, {0, 0}, {}, SpectralModel::cw()).value);
    const double floor = cmd.absolute * reference;

    struct Outcome {
        std::vector<AmplitudeResult> closed;
        std::vector<OracleResult> oracle;
        std::string failure;
    };
    std::vector<Outcome> results(cmd.tuples.size());
    // Threads go to the tuples; the oracle itself runs serially per tuple.
    OracleOptions oracle = cmd.oracle;
    oracle.threads = 1;
    parallel_for(cmd.tuples.size(), c.threads, [&](std::size_t k) {
        const ModeTriplet& t = cmd.tuples[k];
        try {
            results[k].closed = engine.spectrum(t.pump, t.signal, t.idler, det, SpectralModel::cw());
            results[k].oracle = brute_force_spectrum(t.pump, t.signal, t.idler, det, c.geometry, c.crystal,
                                                     SpectralModel::cw(), oracle);
        } catch (const AccuracyError& e) {
            results[k].failure = e.what();
        }
    });

    Table table;
    table.columns = with_triplet({"omega", "closed_re", "closed_im", "oracle_re", "oracle_im", "abs_error",
                                  "rel_error", "oracle_error", "status"});
    int failed = 0, inaccurate = 0;
    double worst_rel = 0.0;
    nlohmann::json errors = nlohmann::json::array();
    for (std::size_t k = 0; k < cmd.tuples.size(); ++k) {
        if (!results[k].failure.empty()) {
            ++inaccurate;
            errors.push_back(results[k].failure);
        }
        for (std::size_t j = 0; j < det.size(); ++j) {
            auto row = triplet_cells(cmd.tuples[k]);
            row.push_back(format_number(cmd.omegas[j]));
            if (!results[k].failure.empty()) {
                row.insert(row.end(), {"nan", "nan", "nan", "nan", "nan", "nan", "nan", "accuracy"});
                table.rows.push_back(std::move(row));
                continue;
            }
            const Complex a = results[k].closed[j].value;
            const Complex b = results[k].oracle[j].value;
            const double diff = std::abs(a - b);
            const double rel = diff > 0.0 ? diff / std::max(std::abs(a), std::abs(b)) : 0.0;
            const bool pass = diff <= std::max(cmd.relative * std::abs(b), floor);
            if (!pass) ++failed;
            if (std::abs(b) > floor) worst_rel = std::max(worst_rel, rel);
            row.insert(row.end(), {format_number(a.real()), format_number(a.imag()), format_number(b.real()),
                                   format_number(b.imag()), format_number(diff), format_number(rel),
                                   format_number(results[k].oracle[j].error_estimate),
                                   results[k].oracle[j].forbidden ? "forbidden" : (pass ? "pass" : "fail")});
            table.rows.push_back(std::move(row));
        }
    }
    table.summary = {{"tuples", cmd.tuples.size()},     {"detunings", det.size()},
                     {"failed", failed},                {"accuracy_failures", inaccurate},
                     {"max_relative_error", worst_rel}, {"relative_tolerance", cmd.relative},
                     {"absolute_floor", floor},         {"oracle_tolerance", cmd.oracle.tolerance},
                     {"errors", errors}};
    if (failed > 0 || inaccurate > 0) table.exit_code = kExitAccuracy;
    return table;
}

Table cmd_gouy_check(const RunConfig& c) {
    const auto& cmd = c.gouy_cmd;
    if (cmd.triplets.empty()) throw ConfigError("no 'gouy_check' block in the configuration");
    GouyOptions opts = cmd.options;
    opts.threads = c.threads;
    const GouyReport report = verify_gouy_spectral_invariance(cmd.triplets, c.geometry, c.crystal, cmd.omegas, opts);
    Table table;
    table.columns = with_triplet({"relative_mode_number", "omega", "normalized", "reduced", "vanishing"});
    for (const GouySpectrum& s : report.spectra) {
        for (std::size_t j = 0; j < cmd.omegas.size(); ++j) {
            auto row = triplet_cells(s.triplet);
            row.insert(row.end(), {std::to_string(s.relative_mode_number), format_number(cmd.omegas[j]),
                                   s.vanishing ? "0" : format_number(s.normalized[j]),
                                   format_number(s.reduced[j]), s.vanishing ? "1" : "0"});
            table.rows.push_back(std::move(row));
        }
    }
    table.summary = {{"within_class_deviation", report.within_class_deviation},
                     {"across_class_deviation", report.across_class_deviation},
                     {"reduced_deviation", report.reduced_deviation},
                     {"within_tolerance", opts.within_tolerance},
                     {"across_threshold", opts.across_threshold},
                     {"passed", report.passed}};
    if (!report.passed) table.exit_code = kExitAccuracy;
    return table;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Laguerre-Gaussian coincidence amplitudes of SPDC photon pairs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, manifest_path, pump_path, target_path, emit_pump_path;
    std::optional<unsigned> threads;
    std::optional<double> tolerance;
    app.add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "CSV output (default: stdout)");
    app.add_option("--manifest", manifest_path, "JSON run manifest (default: next to --out)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores");
    app.add_option("--tolerance", tolerance, "relative quadrature budget of the closed form");
    app.add_option("--pump", pump_path, "YAML file whose 'pump' block replaces the configured pump");

    const char* names[] = {"amplitude", "spiral-bandwidth", "schmidt", "purity-sweep",
                           "engineer", "validate-oracle", "gouy-check"};
    const char* help[] = {"coincidence amplitudes of listed mode tuples",
                          "|C|^2 over (l_s, l_i) for the configured pump",
                          "Schmidt numbers and spatial purity",
                          "spatial purity versus filter bandwidth",
                          "pump coefficients for a target coincidence matrix",
                          "closed form against the brute-force integral",
                          "spectral invariance within relative-mode-number classes"};
    std::vector<CLI::App*> subs;
    for (std::size_t k = 0; k < std::size(names); ++k) subs.push_back(app.add_subcommand(names[k], help[k]));
    subs[4]->add_option("--target", target_path, "target CSV (overrides the configuration)");
    subs[4]->add_option("--emit-pump", emit_pump_path, "write the pump block here (default: <out>.pump.yaml)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    std::string command;
    for (std::size_t k = 0; k < subs.size(); ++k) {
        if (subs[k]->parsed()) command = names[k];
    }

    try {
        RunConfig config = load_config(config_path);
        if (!pump_path.empty()) override_pump(config, read_text(pump_path));
        if (threads) config.threads = *threads;
        if (tolerance) {
            if (!(*tolerance > 0.0)) throw ConfigError("--tolerance must be positive");
            config.amplitude.tolerance = *tolerance;
        }
        if (!target_path.empty()) config.engineer_cmd.target = target_path;

        Table table;
        std::string pump_yaml;
        if (command == "amplitude") table = cmd_amplitude(config);
        else if (command == "spiral-bandwidth") table = cmd_spiral_bandwidth(config);
        else if (command == "schmidt") table = cmd_schmidt(config);
        else if (command == "purity-sweep") table = cmd_purity_sweep(config);
        else if (command == "engineer") table = cmd_engineer(config, pump_yaml);
        else if (command == "validate-oracle") table = cmd_validate_oracle(config);
        else table = cmd_gouy_check(config);

        std::ostringstream csv;
        write_csv(csv, table);
        if (out_path.empty()) {
            out << csv.str();
        } else {
            write_text(out_path, csv.str());
        }
        if (!pump_yaml.empty()) {
            if (emit_pump_path.empty() && !out_path.empty()) emit_pump_path = out_path + ".pump.yaml";
            if (emit_pump_path.empty()) {
                err << pump_yaml;
            } else {
                write_text(emit_pump_path, pump_yaml);
            }
        }
        if (manifest_path.empty() && !out_path.empty()) {
            manifest_path = std::filesystem::path(out_path).replace_extension(".json").string();
        }
        if (!manifest_path.empty()) {
            char hash[24];
            std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(config.source)));
            nlohmann::json manifest = {
                {"command", command},
                {"config", config_path},
                {"config_hash", std::string("fnv1a64:") + hash},
                {"output", out_path.empty() ? "stdout" : out_path},
                {"rows", table.rows.size()},
                {"threads", config.threads},
                {"amplitude_tolerance", config.amplitude.tolerance},
                {"exit_code", table.exit_code},
                {"versions",
                 {{"lgspdc", kVersion},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)}}},
                {"summary", table.summary},
            };
            if (!emit_pump_path.empty()) manifest["pump_output"] = emit_pump_path;
            write_text(manifest_path, manifest.dump(2) + "\n");
        }
        if (table.exit_code == kExitAccuracy) err << command << ": verification or accuracy failure\n";
        if (table.exit_code == kExitInfeasible) err << command << ": target not achievable\n";
        return table.exit_code;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InfeasibleTargetError& e) {
        err << "infeasible target: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const AccuracyError& e) {
        err << "accuracy failure: " << e.what() << '\n';
        return kExitAccuracy;
    } catch (const ConvergenceError& e) {
        err << "accuracy failure: " << e.what() << '\n';
        return kExitAccuracy;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const YAML::Exception& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace lgspdc
