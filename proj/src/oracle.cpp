#include "lgspdc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "lgspdc/errors.hpp"
#include "lgspdc/parallel.hpp"
#include "lgspdc/quadrature.hpp"

namespace lgspdc {

namespace {

constexpr double kPi = std::numbers::pi;

// Momentum-space LG mode in generalized-Laguerre form, evaluated from Cartesian
// components: N (w/√2)^{|l|+1} (-1)^p i^l (q_x ± i q_y)^{|l|} L_p^{|l|}(x) e^{-x/2}.
class LaguerreMode {
public:
    LaguerreMode(ModeIndex m, double waist) : mode_(m), waist_(waist) {
        const int al = std::abs(m.l);
        const double norm = std::sqrt(std::tgamma(m.p + 1.0) / (kPi * std::tgamma(m.p + al + 1.0)));
        prefactor_ = norm * std::pow(waist / std::numbers::sqrt2, al + 1) * (m.p % 2 ? -1.0 : 1.0);
        const int r = ((m.l % 4) + 4) % 4;
        phase_ = r == 0 ? Complex(1, 0) : r == 1 ? Complex(0, 1) : r == 2 ? Complex(-1, 0) : Complex(0, -1);
    }

    Complex operator()(double qx, double qy) const {
        const int al = std::abs(mode_.l);
        const double rho2 = qx * qx + qy * qy;
        const double x = 0.5 * rho2 * waist_ * waist_;
        const Complex q(qx, mode_.l >= 0 ? qy : -qy);
        Complex angular = 1.0;
        for (int k = 0; k < al; ++k) angular *= q;
        return prefactor_ * laguerre(mode_.p, al, x) * std::exp(-0.5 * x) * angular * phase_;
    }

    static double laguerre(int p, int alpha, double x) {
        double l0 = 1.0;
        if (p == 0) return l0;
        double l1 = 1.0 + alpha - x;
        for (int k = 1; k < p; ++k) {
            const double l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
            l0 = l1;
            l1 = l2;
        }
        return l1;
    }

private:
    ModeIndex mode_;
    double waist_;
    double prefactor_;
    Complex phase_;
};

QuadratureRule radial_rule(const QuadratureGrid& grid, double cutoff) {
    if (grid.family == QuadratureGrid::Radial::legendre) {
        return gauss_legendre(grid.radial_nodes, 0.0, cutoff);
    }
    QuadratureRule rule = gauss_laguerre(grid.radial_nodes);
    // Stretch so the outermost node lands on the cutoff.
    const double scale = cutoff / rule.nodes.back();
    for (std::size_t k = 0; k < rule.size(); ++k) {
        rule.nodes[k] *= scale;
        rule.weights[k] *= scale;
    }
    return rule;
}

// ∫_{-L/2}^{L/2} e^{iκz} dz
double z_integral(double kappa, double length) {
    const double x = 0.5 * kappa * length;
    if (std::abs(x) < 1e-4) return length * (1.0 - x * x / 6.0);
    return length * std::sin(x) / x;
}

}  // namespace

void QuadratureGrid::validate() const {
    if (radial_nodes < kMinRadialNodes || angular_nodes < kMinAngularNodes) {
        throw DomainError("oracle grid has too few nodes");
    }
    if (cutoff_widths < 8.0) {
        throw DomainError("oracle radial cutoff must cover at least 8 Gaussian widths");
    }
}

QuadratureGrid QuadratureGrid::refined() const {
    QuadratureGrid g = *this;
    g.radial_nodes = radial_nodes + radial_nodes / 2;
    g.angular_nodes = angular_nodes + angular_nodes / 2;
    return g;
}

std::vector<Complex> overlap_on_grid(ModeIndex P, ModeIndex S, ModeIndex I,
                                     std::span<const Detunings> detunings,
                                     const BeamGeometry& geometry, const CrystalSpec& crystal,
                                     const QuadratureGrid& grid, std::vector<double>& abs_integral,
                                     unsigned threads) {
    grid.validate();
    const double cutoff =
        grid.cutoff_widths * 2.0 /
        std::min({geometry.waist_pump, geometry.waist_signal, geometry.waist_idler});
    const QuadratureRule radial = radial_rule(grid, cutoff);
    const int na = grid.angular_nodes;
    const std::size_t nr = radial.size(), nd = detunings.size();

    const double kp = crystal.pump.wavenumber, ks = crystal.signal.wavenumber,
                 ki = crystal.idler.wavenumber;
    const double as = (kp - ks) / (2.0 * kp * ks), ai = (kp - ki) / (2.0 * kp * ki);
    std::vector<double> delta(nd);
    for (std::size_t k = 0; k < nd; ++k) delta[k] = delta_omega(detunings[k], crystal);

    const LaguerreMode pump(P, geometry.waist_pump), signal(S, geometry.waist_signal),
        idler(I, geometry.waist_idler);
    std::vector<double> cosines(na), sines(na);
    for (int j = 0; j < na; ++j) {
        cosines[j] = std::cos(2.0 * kPi * j / na);
        sines[j] = std::sin(2.0 * kPi * j / na);
    }

    std::vector<Complex> idler_table(nr * na);
    for (std::size_t b = 0; b < nr; ++b) {
        for (int j = 0; j < na; ++j) {
            const double ri = radial.nodes[b];
            idler_table[b * na + j] = std::conj(idler(ri * cosines[j], ri * sines[j]));
        }
    }

    // Radial envelopes of signal and idler; pairs far below the peak product are skipped.
    std::vector<double> env_s(nr), env_i(nr);
    for (std::size_t b = 0; b < nr; ++b) {
        const double r = radial.nodes[b];
        env_s[b] = std::abs(signal(r, 0.0)) * radial.weights[b] * r;
        double m = 0.0;
        for (int j = 0; j < na; ++j) m = std::max(m, std::abs(idler_table[b * na + j]));
        env_i[b] = m * radial.weights[b] * r;
    }
    const double peak = *std::max_element(env_s.begin(), env_s.end()) *
                        *std::max_element(env_i.begin(), env_i.end());
    const double skip_below = 1e-18 * peak;

    // Row sums over (ρ_i, Δφ) for every ρ_s node, combined in a fixed order below.
    std::vector<Complex> rows(nr * nd);
    std::vector<double> abs_rows(nr * nd);
    parallel_for(nr, threads, [&](std::size_t a) {
        const double rs = radial.nodes[a];
        const Complex ls = std::conj(signal(rs, 0.0));
        std::vector<Complex> acc(nd, 0.0);
        std::vector<double> acc_abs(nd, 0.0);
        for (std::size_t b = 0; b < nr; ++b) {
            if (env_s[a] * env_i[b] < skip_below) continue;
            const double ri = radial.nodes[b];
            const double w = radial.weights[a] * radial.weights[b] * rs * ri;
            for (int j = 0; j < na; ++j) {
                const double c = cosines[j], s = sines[j];
                const Complex f = pump(rs + ri * c, ri * s) * ls * idler_table[b * na + j] * w;
                if (f == Complex(0.0)) continue;
                const double kappa0 = rs * rs * as + ri * ri * ai - rs * ri * c / kp;
                for (std::size_t k = 0; k < nd; ++k) {
                    const Complex term = f * z_integral(kappa0 + delta[k], crystal.length);
                    acc[k] += term;
                    acc_abs[k] += std::abs(term);
                }
            }
        }
        for (std::size_t k = 0; k < nd; ++k) {
            rows[a * nd + k] = acc[k];
            abs_rows[a * nd + k] = acc_abs[k];
        }
    });

    // 2π from the absolute angle, 2π/na from the Δφ trapezoid.
    const double angular = 2.0 * kPi * (2.0 * kPi / na);
    std::vector<Complex> out(nd, 0.0);
    abs_integral.assign(nd, 0.0);
    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t k = 0; k < nd; ++k) {
            out[k] += rows[a * nd + k];
            abs_integral[k] += abs_rows[a * nd + k];
        }
    }
    for (std::size_t k = 0; k < nd; ++k) {
        out[k] *= angular;
        abs_integral[k] *= angular;
    }
    return out;
}

std::vector<OracleResult> brute_force_spectrum(ModeIndex P, ModeIndex S, ModeIndex I,
                                               std::span<const Detunings> detunings,
                                               const BeamGeometry& geometry,
                                               const CrystalSpec& crystal,
                                               const SpectralModel& spectrum,
                                               const OracleOptions& options) {
    std::vector<OracleResult> out(detunings.size());
    if (P.l != S.l + I.l) {
        for (auto& r : out) {
            r.forbidden = true;
            r.grid = options.grid;
        }
        return out;
    }
    spectrum.validate();
    if (spectrum.kind == SpectralModel::Kind::cw) {
        for (const auto& d : detunings) {
            if (std::abs(d.signal + d.idler) > 1e-12 * std::max({1.0, std::abs(d.signal), std::abs(d.idler)})) {
                throw DomainError("continuous-wave pump requires idler detuning = -signal detuning");
            }
        }
    }
    geometry.validate();

    QuadratureGrid grid = options.grid;
    std::vector<double> abs_coarse, abs_fine;
    std::vector<Complex> coarse =
        overlap_on_grid(P, S, I, detunings, geometry, crystal, grid, abs_coarse, options.threads);
    for (int level = 0;; ++level) {
        const QuadratureGrid finer = grid.refined();
        std::vector<Complex> fine =
            overlap_on_grid(P, S, I, detunings, geometry, crystal, finer, abs_fine, options.threads);
        bool settled = true;
        double worst = 0.0;
        for (std::size_t k = 0; k < detunings.size(); ++k) {
            const double diff = std::abs(fine[k] - coarse[k]);
            const double rel = abs_fine[k] > 0.0 ? diff / abs_fine[k] : diff;
            worst = std::max(worst, rel);
            if (rel > options.tolerance) settled = false;
        }
        if (settled) {
            for (std::size_t k = 0; k < detunings.size(); ++k) {
                const double env = spectrum.envelope(detunings[k]);
                out[k].value = env * fine[k];
                out[k].error_estimate = env * std::abs(fine[k] - coarse[k]);
                out[k].scale = env * abs_fine[k];
                out[k].grid = finer;
            }
            return out;
        }
        if (level + 1 >= options.max_refinements) {
            throw AccuracyError("oracle grid refinement did not settle", worst);
        }
        grid = finer;
        coarse = std::move(fine);
        abs_coarse = abs_fine;
    }
}

OracleResult brute_force_amplitude(const AmplitudeRequest& req, const OracleOptions& options) {
    return brute_force_spectrum(req.pump_mode, req.signal_mode, req.idler_mode,
                                std::span(&req.detunings, 1), req.geometry, req.crystal,
                                req.spectrum, options)
        .front();
}

namespace {

// Ψ sampled on (ρ_s, ρ_i, Δφ) with the absolute azimuth factored out: each pump
// OAM value l contributes e^{ilφ_s} f_l(ρ_s, ρ_i, Δφ), and different l never interfere
// after the φ_s integral.
class ContinuumField {
public:
    ContinuumField(const PumpSpec& pump, const BeamGeometry& geometry, const CrystalSpec& crystal,
                   const ContinuumGrid& grid)
        : crystal_(crystal), na_(grid.angular_nodes) {
        if (grid.radial_nodes < QuadratureGrid::kMinRadialNodes || grid.angular_nodes < QuadratureGrid::kMinAngularNodes) {
            throw DomainError("continuum grid has too few nodes");
        }
        if (grid.cutoff_widths < 8.0) throw DomainError("continuum radial cutoff must cover at least 8 widths");
        pump.validate(1e-9);
        for (const auto& c : pump.components) {
            if (c.coefficient != Complex(0.0)) groups_[c.mode.l].push_back({LaguerreMode(c.mode, geometry.waist_pump), c.coefficient});
        }
        const double cutoff = grid.cutoff_widths * 2.0 / geometry.waist_pump;
        radial_ = gauss_legendre(grid.radial_nodes, 0.0, cutoff);
        const double kp = crystal.pump.wavenumber, ks = crystal.signal.wavenumber, ki = crystal.idler.wavenumber;
        as_ = (kp - ks) / (2.0 * kp * ks);
        ai_ = (kp - ki) / (2.0 * kp * ki);
        for (int j = 0; j < na_; ++j) {
            cos_.push_back(std::cos(2.0 * kPi * j / na_));
            sin_.push_back(std::sin(2.0 * kPi * j / na_));
        }
    }

    std::size_t radial_size() const { return radial_.size(); }
    int angular_size() const { return na_; }
    std::vector<int> pump_l() const {
        std::vector<int> out;
        for (const auto& [l, v] : groups_) out.push_back(l);
        return out;
    }
    // sqrt of the radial measure w ρ
    double measure(std::size_t a) const { return std::sqrt(radial_.weights[a] * radial_.nodes[a]); }

    // Pump part and κ at Ω = 0 for one sample.
    Complex pump(int l, std::size_t a, std::size_t b, int j) const {
        const double rs = radial_.nodes[a], ri = radial_.nodes[b];
        Complex sum = 0.0;
        for (const auto& [mode, coeff] : groups_.at(l)) sum += coeff * mode(rs + ri * cos_[j], ri * sin_[j]);
        return sum;
    }
    double kappa0(std::size_t a, std::size_t b, int j) const {
        const double rs = radial_.nodes[a], ri = radial_.nodes[b];
        return rs * rs * as_ + ri * ri * ai_ - rs * ri * cos_[j] / crystal_.pump.wavenumber;
    }
    double length() const { return crystal_.length; }

private:
    CrystalSpec crystal_;
    int na_;
    std::map<int, std::vector<std::pair<LaguerreMode, Complex>>> groups_;
    QuadratureRule radial_;
    double as_ = 0.0, ai_ = 0.0;
    std::vector<double> cos_, sin_;
};

std::vector<double> mismatches(const OmegaGrid& grid, const CrystalSpec& crystal) {
    std::vector<double> out;
    for (double w : grid.nodes) out.push_back(delta_omega(Detunings::cw(w), crystal));
    return out;
}

}  // namespace

double continuum_schmidt_number(const PumpSpec& pump, const BeamGeometry& geometry, const CrystalSpec& crystal,
                                const OmegaGrid& grid, const ContinuumGrid& options) {
    grid.validate();
    const ContinuumField field(pump, geometry, crystal, options);
    const std::size_t nr = field.radial_size();
    const int na = field.angular_size();
    const std::vector<double> delta = mismatches(grid, crystal);
    const std::vector<int> pump_l = field.pump_l();

    // Pump values are Ω-independent.
    std::vector<std::vector<Complex>> pump_values(pump_l.size(), std::vector<Complex>(nr * nr * na));
    std::vector<double> kappa(nr * nr * na);
    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t b = 0; b < nr; ++b) {
            for (int j = 0; j < na; ++j) {
                const std::size_t idx = (a * nr + b) * na + j;
                kappa[idx] = field.kappa0(a, b, j);
                for (std::size_t g = 0; g < pump_l.size(); ++g) pump_values[g][idx] = field.pump(pump_l[g], a, b, j);
            }
        }
    }

    std::vector<Complex> twiddle(static_cast<std::size_t>(na) * static_cast<std::size_t>(na));
    for (int m = 0; m < na; ++m) {
        for (int j = 0; j < na; ++j) twiddle[static_cast<std::size_t>(m * na + j)] = std::polar(1.0, -2.0 * kPi * ((m * j) % na) / na) / double(na);
    }

    std::vector<double> traces(grid.size()), squares(grid.size());
    parallel_for(grid.size(), options.threads, [&](std::size_t k) {
        // Harmonics c_m(ρ_s, ρ_i) of each pump group; idler OAM m, signal OAM l - m.
        std::map<int, Eigen::MatrixXcd> blocks;  // signal OAM -> Σ X X†
        std::vector<Complex> f(static_cast<std::size_t>(na));
        for (std::size_t g = 0; g < pump_l.size(); ++g) {
            std::vector<Eigen::MatrixXcd> x(static_cast<std::size_t>(na), Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nr)));
            for (std::size_t a = 0; a < nr; ++a) {
                for (std::size_t b = 0; b < nr; ++b) {
                    for (int j = 0; j < na; ++j) {
                        const std::size_t idx = (a * nr + b) * na + j;
                        f[static_cast<std::size_t>(j)] = pump_values[g][idx] * z_integral(kappa[idx] + delta[k], field.length());
                    }
                    const double m_ab = field.measure(a) * field.measure(b);
                    for (int m = 0; m < na; ++m) {
                        Complex c = 0.0;
                        for (int j = 0; j < na; ++j) c += f[static_cast<std::size_t>(j)] * twiddle[static_cast<std::size_t>(m * na + j)];
                        x[static_cast<std::size_t>(m)](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m_ab * c;
                    }
                }
            }
            for (int m = 0; m < na; ++m) {
                const int harmonic = m < na / 2 ? m : m - na;
                const int ls = pump_l[g] - harmonic;
                const Eigen::MatrixXcd& xm = x[static_cast<std::size_t>(m)];
                auto it = blocks.find(ls);
                if (it == blocks.end()) {
                    blocks.emplace(ls, xm * xm.adjoint());
                } else {
                    it->second += xm * xm.adjoint();
                }
            }
        }
        double t = 0.0, t2 = 0.0;
        for (const auto& [ls, rho] : blocks) {
            t += rho.trace().real();
            t2 += rho.cwiseAbs2().sum();
        }
        traces[k] = grid.weights[k] * t;
        squares[k] = grid.weights[k] * grid.weights[k] * t2;
    });
    double t = 0.0, t2 = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        t += traces[k];
        t2 += squares[k];
    }
    if (!(t > 0.0)) throw EmptySubspaceError("two-photon field vanishes on the grid");
    return t * t / t2;
}

double continuum_spatial_purity(const PumpSpec& pump, const BeamGeometry& geometry, const CrystalSpec& crystal,
                                const OmegaGrid& grid, const ContinuumGrid& options) {
    grid.validate();
    const ContinuumField field(pump, geometry, crystal, options);
    const std::size_t nr = field.radial_size(), nw = grid.size();
    const int na = field.angular_size();
    const std::vector<double> delta = mismatches(grid, crystal);
    const std::vector<int> pump_l = field.pump_l();

    // Gram matrix of the spatial states Ψ_Ω, accumulated per signal radius.
    std::vector<Eigen::MatrixXcd> partial(nr);
    parallel_for(nr, options.threads, [&](std::size_t a) {
        Eigen::MatrixXcd f(static_cast<Eigen::Index>(nr * static_cast<std::size_t>(na) * pump_l.size()),
                           static_cast<Eigen::Index>(nw));
        Eigen::Index row = 0;
        for (std::size_t g = 0; g < pump_l.size(); ++g) {
            for (std::size_t b = 0; b < nr; ++b) {
                const double m_ab = field.measure(a) * field.measure(b);
                for (int j = 0; j < na; ++j) {
                    const Complex p = m_ab * field.pump(pump_l[g], a, b, j);
                    const double k0 = field.kappa0(a, b, j);
                    for (std::size_t k = 0; k < nw; ++k) {
                        f(row, static_cast<Eigen::Index>(k)) =
                            std::sqrt(grid.weights[k]) * p * z_integral(k0 + delta[k], field.length());
                    }
                    ++row;
                }
            }
        }
        partial[a] = f.adjoint() * f;
    });
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nw), static_cast<Eigen::Index>(nw));
    for (const auto& g : partial) gram += g;
    const double trace = gram.trace().real();
    if (!(trace > 0.0)) throw EmptySubspaceError("two-photon field vanishes on the grid");
    return gram.cwiseAbs2().sum() / (trace * trace);
}

}  // namespace lgspdc
