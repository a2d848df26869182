#include "lgspdc/engineering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "lgspdc/errors.hpp"
#include "lgspdc/parallel.hpp"

namespace lgspdc {

namespace {

std::vector<ModeIndex> azimuthal_modes(int l_min, int l_max) {
    std::vector<ModeIndex> m;
    for (int l = l_min; l <= l_max; ++l) m.push_back({0, l});
    return m;
}

struct Entry {
    Eigen::Index row, col;
    int l;
};

}  // namespace

TargetMatrix TargetMatrix::azimuthal(int l_min, int l_max) {
    if (l_max < l_min) throw DomainError("empty OAM range");
    TargetMatrix t;
    t.signal_modes = azimuthal_modes(l_min, l_max);
    t.idler_modes = t.signal_modes;
    const auto n = static_cast<Eigen::Index>(t.signal_modes.size());
    t.entries = Eigen::MatrixXcd::Zero(n, n);
    return t;
}

TargetMatrix TargetMatrix::permutation(int l_min, std::span<const int> perm) {
    const int n = static_cast<int>(perm.size());
    TargetMatrix t = azimuthal(l_min, l_min + n - 1);
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (perm[i] < 0 || perm[i] >= n || seen[static_cast<std::size_t>(perm[i])]++) {
            throw DomainError("not a permutation");
        }
        t.entries(i, perm[i]) = 1.0;
    }
    return t;
}

Complex& TargetMatrix::at(int signal_l, int idler_l) {
    auto find = [](const std::vector<ModeIndex>& modes, int l) {
        const auto it = std::find_if(modes.begin(), modes.end(), [&](ModeIndex m) { return m.p == 0 && m.l == l; });
        if (it == modes.end()) throw DomainError("mode outside the target subspace");
        return static_cast<Eigen::Index>(it - modes.begin());
    };
    return entries(find(signal_modes, signal_l), find(idler_modes, idler_l));
}

void TargetMatrix::validate() const {
    if (entries.rows() != static_cast<Eigen::Index>(signal_modes.size()) ||
        entries.cols() != static_cast<Eigen::Index>(idler_modes.size())) {
        throw DomainError("target matrix dimensions do not match its mode lists");
    }
    if (entries.size() == 0 || entries.cwiseAbs().maxCoeff() == 0.0) {
        throw DomainError("target matrix is zero");
    }
}

TargetMatrix read_target_csv(std::istream& in) {
    std::vector<std::tuple<int, int, Complex>> rows;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        int ls = 0, li = 0;
        double re = 0.0, im = 0.0;
        if (!(fields >> ls >> li >> re)) {
            if (rows.empty() && line_number == 1) continue;  // header
            throw DomainError("target CSV line " + std::to_string(line_number) + ": expected l_s,l_i,re[,im]");
        }
        fields >> im;
        rows.emplace_back(ls, li, Complex(re, im));
    }
    if (rows.empty()) throw DomainError("target CSV has no entries");
    int lo = std::get<0>(rows[0]), hi = lo;
    for (const auto& [s, i, v] : rows) {
        lo = std::min({lo, s, i});
        hi = std::max({hi, s, i});
    }
    TargetMatrix t = TargetMatrix::azimuthal(lo, hi);
    for (const auto& [s, i, v] : rows) t.at(s, i) = v;
    return t;
}

int relative_mode_number(ModeIndex pump, ModeIndex signal, ModeIndex idler) {
    return pump.order() - signal.order() - idler.order();
}

PumpSolution solve_pump_coefficients(const TargetMatrix& target, const BeamGeometry& geometry,
                                     const CrystalSpec& crystal, const SolverOptions& options) {
    target.validate();
    const Eigen::Index rows = target.entries.rows(), cols = target.entries.cols();

    AmplitudeOptions amp = options.amplitude;
    for (const auto& m : target.signal_modes) {
        amp.truncation.p_max = std::max(amp.truncation.p_max, m.p);
        amp.truncation.l_max = std::max(amp.truncation.l_max, std::abs(m.l));
    }
    for (const auto& m : target.idler_modes) {
        amp.truncation.p_max = std::max(amp.truncation.p_max, m.p);
        amp.truncation.l_max = std::max(amp.truncation.l_max, 2 * std::abs(m.l));
    }
    for (const auto& m : options.pump_basis) {
        amp.truncation.p_max = std::max(amp.truncation.p_max, m.p);
        amp.truncation.l_max = std::max(amp.truncation.l_max, std::abs(m.l));
    }
    for (const auto& s : target.signal_modes) {
        for (const auto& i : target.idler_modes) {
            amp.truncation.l_max = std::max(amp.truncation.l_max, std::abs(s.l + i.l));
        }
    }
    const AmplitudeEngine engine(geometry, crystal, amp);

    // Pump modes: one p = 0 mode per anti-diagonal carrying a nonzero target, unless given.
    std::vector<ModeIndex> basis = options.pump_basis;
    if (basis.empty()) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (target.entries(r, c) != Complex(0.0)) {
                    basis.push_back({0, target.signal_modes[static_cast<std::size_t>(r)].l +
                                            target.idler_modes[static_cast<std::size_t>(c)].l});
                }
            }
        }
    }
    std::sort(basis.begin(), basis.end());
    basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
    const bool joint = std::any_of(basis.begin(), basis.end(), [](ModeIndex m) { return m.p > 0; });

    // Ω = 0 amplitudes of every basis mode into every subspace entry it can reach.
    std::vector<Entry> entries;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            entries.push_back({r, c, target.signal_modes[static_cast<std::size_t>(r)].l +
                                         target.idler_modes[static_cast<std::size_t>(c)].l});
        }
    }
    std::vector<Eigen::MatrixXcd> response(basis.size(), Eigen::MatrixXcd::Zero(rows, cols));
    parallel_for(basis.size() * entries.size(), options.threads, [&](std::size_t job) {
        const std::size_t b = job / entries.size();
        const Entry& e = entries[job % entries.size()];
        if (e.l != basis[b].l) return;
        response[b](e.row, e.col) =
            engine.amplitude(basis[b], target.signal_modes[static_cast<std::size_t>(e.row)],
                             target.idler_modes[static_cast<std::size_t>(e.col)], Detunings::cw(0.0),
                             SpectralModel::cw())
                .value;
    });

    PumpSolution sol;
    std::vector<Complex> coeff(basis.size(), 0.0);
    if (!joint) {
        for (std::size_t b = 0; b < basis.size(); ++b) {
            Complex num = 0.0;
            double den = 0.0;
            AntiDiagonalFit fit;
            fit.l = basis[b].l;
            for (const Entry& e : entries) {
                const Complex t = target.entries(e.row, e.col);
                if (e.l != fit.l || t == Complex(0.0)) continue;
                const Complex c = response[b](e.row, e.col);
                num += std::conj(c) * t;
                den += std::norm(c);
                ++fit.fitted_entries;
            }
            if (!(den > 0.0)) {
                throw InfeasibleTargetError("pump mode l = " + std::to_string(fit.l) +
                                                " produces no amplitude on its target entries",
                                            1.0);
            }
            coeff[b] = num / den;
            fit.coefficient = coeff[b];
            double r2 = 0.0, cmax = 0.0, asym = 0.0;
            for (const Entry& e : entries) {
                if (e.l != fit.l) continue;
                const Complex t = target.entries(e.row, e.col);
                const Complex c = response[b](e.row, e.col);
                if (t != Complex(0.0)) r2 += std::norm(t - coeff[b] * c);
                cmax = std::max(cmax, std::abs(c));
                // Mirrored entry (l_i, l_s), if it lies in the subspace.
                const ModeIndex s = target.signal_modes[static_cast<std::size_t>(e.row)];
                const ModeIndex i = target.idler_modes[static_cast<std::size_t>(e.col)];
                const auto rs = std::find(target.signal_modes.begin(), target.signal_modes.end(), i);
                const auto ci = std::find(target.idler_modes.begin(), target.idler_modes.end(), s);
                if (rs != target.signal_modes.end() && ci != target.idler_modes.end()) {
                    const Complex mirrored =
                        response[b](rs - target.signal_modes.begin(), ci - target.idler_modes.begin());
                    asym = std::max(asym, std::abs(c - mirrored));
                }
            }
            fit.residual = std::sqrt(r2);
            fit.asymmetry = cmax > 0.0 ? asym / cmax : 0.0;
            sol.diagonals.push_back(fit);
        }
    } else {
        // Joint least squares over the nonzero targets; p > 0 modes couple anti-diagonals.
        std::vector<const Entry*> used;
        for (const Entry& e : entries) {
            if (target.entries(e.row, e.col) != Complex(0.0)) used.push_back(&e);
        }
        Eigen::MatrixXcd a(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(basis.size()));
        Eigen::VectorXcd t(static_cast<Eigen::Index>(used.size()));
        for (std::size_t k = 0; k < used.size(); ++k) {
            t(static_cast<Eigen::Index>(k)) = target.entries(used[k]->row, used[k]->col);
            for (std::size_t b = 0; b < basis.size(); ++b) {
                a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b)) =
                    response[b](used[k]->row, used[k]->col);
            }
        }
        const Eigen::VectorXcd x = a.colPivHouseholderQr().solve(t);
        for (std::size_t b = 0; b < basis.size(); ++b) {
            coeff[b] = x(static_cast<Eigen::Index>(b));
            sol.diagonals.push_back({basis[b].l, coeff[b], 0.0, 0.0, 0});
        }
    }

    sol.realized = Eigen::MatrixXcd::Zero(rows, cols);
    for (std::size_t b = 0; b < basis.size(); ++b) sol.realized += coeff[b] * response[b];
    const double tnorm = target.entries.norm();
    double fit2 = 0.0;
    for (const Entry& e : entries) {
        const Complex t = target.entries(e.row, e.col);
        if (t != Complex(0.0)) fit2 += std::norm(t - sol.realized(e.row, e.col));
    }
    sol.fit_residual = std::sqrt(fit2) / tnorm;
    sol.full_residual = (target.entries - sol.realized).norm() / tnorm;
    for (const auto& d : sol.diagonals) sol.max_asymmetry = std::max(sol.max_asymmetry, d.asymmetry);
    sol.achievable = sol.fit_residual <= options.threshold;

    PumpSpec pump;
    for (std::size_t b = 0; b < basis.size(); ++b) {
        if (coeff[b] != Complex(0.0)) pump.components.push_back({basis[b], coeff[b]});
    }
    pump.wavelength = options.pump_wavelength;
    sol.pump = pump.components.empty() ? pump : pump.normalized();
    if (!sol.achievable && options.throw_on_infeasible) {
        throw InfeasibleTargetError("target cannot be realized with the given pump modes", sol.fit_residual);
    }
    return sol;
}

GouyReport verify_gouy_spectral_invariance(std::span<const ModeTriplet> triplets,
                                           const BeamGeometry& geometry, const CrystalSpec& crystal,
                                           std::span<const double> omegas, const GouyOptions& options) {
    require_matched_gouy_geometry(geometry, crystal);
    if (omegas.empty()) throw DomainError("empty frequency list");
    std::vector<Detunings> detunings;
    for (double w : omegas) detunings.push_back(Detunings::cw(w));

    // Amplitude unit for the absolute floors.
    AmplitudeRequest unit;
    unit.geometry = geometry;
    unit.crystal = crystal;
    const double reference = std::abs(coincidence_amplitude(unit));

    AmplitudeOptions amp;
    amp.tolerance = options.amplitude_tolerance;
    amp.absolute_tolerance = options.amplitude_tolerance * reference;
    for (const auto& t : triplets) {
        for (const ModeIndex m : {t.pump, t.signal, t.idler}) {
            amp.truncation.p_max = std::max(amp.truncation.p_max, m.p);
            amp.truncation.l_max = std::max(amp.truncation.l_max, std::abs(m.l));
        }
    }
    const AmplitudeEngine engine(geometry, crystal, amp);

    auto peak_normalized = [](std::vector<double> v) {
        const double peak = *std::max_element(v.begin(), v.end());
        if (!(peak > 0.0)) throw DomainError("spectrum vanishes on the whole grid");
        for (double& x : v) x /= peak;
        return v;
    };

    GouyReport report;
    report.spectra.resize(triplets.size());
    parallel_for(triplets.size(), options.threads, [&](std::size_t k) {
        const ModeTriplet& t = triplets[k];
        if (t.pump.l != t.signal.l + t.idler.l) throw DomainError("triplet violates OAM conservation");
        GouySpectrum& g = report.spectra[k];
        g.triplet = t;
        g.relative_mode_number = relative_mode_number(t.pump, t.signal, t.idler);
        const auto values = engine.spectrum(t.pump, t.signal, t.idler, detunings, SpectralModel::cw());
        std::vector<double> direct, reduced;
        double peak = 0.0;
        for (const auto& v : values) peak = std::max(peak, std::abs(v.value));
        if (peak <= options.vanishing_threshold * reference) {
            g.vanishing = true;
            return;
        }
        for (std::size_t j = 0; j < detunings.size(); ++j) {
            direct.push_back(std::norm(values[j].value));
            reduced.push_back(std::norm(gouy_reduced_amplitude(g.relative_mode_number, detunings[j], geometry,
                                                               crystal, 1e-12)));
        }
        g.normalized = peak_normalized(std::move(direct));
        g.reduced = peak_normalized(std::move(reduced));
        for (std::size_t j = 0; j < detunings.size(); ++j) {
            g.reduced_deviation = std::max(g.reduced_deviation, std::abs(g.normalized[j] - g.reduced[j]));
        }
    });

    auto gap = [](const GouySpectrum& a, const GouySpectrum& b) {
        double m = 0.0;
        for (std::size_t j = 0; j < a.normalized.size(); ++j) {
            m = std::max(m, std::abs(a.normalized[j] - b.normalized[j]));
        }
        return m;
    };
    std::map<std::pair<int, int>, double> class_gap;
    for (std::size_t a = 0; a < report.spectra.size(); ++a) {
        if (report.spectra[a].vanishing) continue;
        report.reduced_deviation = std::max(report.reduced_deviation, report.spectra[a].reduced_deviation);
        for (std::size_t b = a + 1; b < report.spectra.size(); ++b) {
            if (report.spectra[b].vanishing) continue;
            const int na = report.spectra[a].relative_mode_number, nb = report.spectra[b].relative_mode_number;
            const double d = gap(report.spectra[a], report.spectra[b]);
            if (na == nb) {
                report.within_class_deviation = std::max(report.within_class_deviation, d);
            } else {
                const auto key = std::minmax(na, nb);
                const auto it = class_gap.find(key);
                class_gap[key] = it == class_gap.end() ? d : std::min(it->second, d);
            }
        }
    }
    if (!class_gap.empty()) {
        report.across_class_deviation = class_gap.begin()->second;
        for (const auto& [k, v] : class_gap) report.across_class_deviation = std::min(report.across_class_deviation, v);
    }
    report.passed = report.within_class_deviation <= options.within_tolerance &&
                    report.reduced_deviation <= options.within_tolerance &&
                    (class_gap.empty() || report.across_class_deviation > options.across_threshold);
    return report;
}

}  // namespace lgspdc
