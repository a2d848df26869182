#include "lgspdc/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include "lgspdc/errors.hpp"
#include "lgspdc/parallel.hpp"
#include "lgspdc/quadrature.hpp"

namespace lgspdc {

namespace {

constexpr double kTwoPiC = 2.0 * std::numbers::pi * kSpeedOfLight;

void collect_bases(BiphotonState& s) {
    s.signal_modes.clear();
    s.idler_modes.clear();
    for (const auto& p : s.pairs) {
        s.signal_modes.push_back(p.signal);
        s.idler_modes.push_back(p.idler);
    }
    for (auto* v : {&s.signal_modes, &s.idler_modes}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
}

// Rescales amplitudes (and the Ω = 0 column) to unit total weight.
void renormalize(BiphotonState& s) {
    const double total = s.total_weight();
    if (!(total > 0.0)) throw EmptySubspaceError("state has zero norm");
    const double f = 1.0 / std::sqrt(total);
    for (auto& c : s.amplitudes) c *= f;
    for (auto& c : s.center) c *= f;
    s.norm *= f;
}

std::size_t index_of(std::span<const ModeIndex> modes, ModeIndex m) {
    return static_cast<std::size_t>(std::lower_bound(modes.begin(), modes.end(), m) - modes.begin());
}

// Signal x idler coefficient matrix of a column of pair amplitudes.
Eigen::MatrixXcd pair_matrix(const BiphotonState& s, auto&& value) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s.signal_modes.size()),
                                                static_cast<Eigen::Index>(s.idler_modes.size()));
    for (std::size_t a = 0; a < s.pairs.size(); ++a) {
        m(static_cast<Eigen::Index>(index_of(s.signal_modes, s.pairs[a].signal)),
          static_cast<Eigen::Index>(index_of(s.idler_modes, s.pairs[a].idler))) = value(a);
    }
    return m;
}


std::vector<ModePair> allowed_pairs(const PumpSpec& pump, const Truncation& truncation) {
    std::vector<ModeIndex> modes;
    for (int p = 0; p <= truncation.p_max; ++p) {
        for (int l = -truncation.l_max; l <= truncation.l_max; ++l) modes.push_back({p, l});
    }
    std::sort(modes.begin(), modes.end());
    std::vector<ModePair> pairs;
    for (const auto& s : modes) {
        for (const auto& i : modes) {
            const bool allowed = std::any_of(pump.components.begin(), pump.components.end(),
                                             [&](const PumpComponent& c) {
                                                 return c.mode.l == s.l + i.l && c.coefficient != Complex(0.0);
                                             });
            if (allowed) pairs.push_back({s, i});
        }
    }
    return pairs;
}

// Σ_c a_c C(c, s, i)(Ω) for every pair and CW detuning, pair-major.
std::vector<Complex> pair_spectra(const PumpSpec& pump, const Truncation& truncation,
                                  const std::vector<ModePair>& pairs, const std::vector<double>& omegas,
                                  const BeamGeometry& geometry, const CrystalSpec& crystal,
                                  const StateOptions& options) {
    AmplitudeOptions amp = options.amplitude;
    for (const auto& c : pump.components) {
        amp.truncation.p_max = std::max({amp.truncation.p_max, truncation.p_max, c.mode.p});
        amp.truncation.l_max = std::max({amp.truncation.l_max, truncation.l_max, std::abs(c.mode.l)});
    }
    const AmplitudeEngine engine(geometry, crystal, amp);
    std::vector<Detunings> detunings;
    for (double w : omegas) detunings.push_back(Detunings::cw(w));
    const std::size_t n = omegas.size();
    std::vector<Complex> out(pairs.size() * n, 0.0);
    parallel_for(pairs.size(), options.threads, [&](std::size_t a) {
        const ModePair& pr = pairs[a];
        for (const auto& c : pump.components) {
            if (c.mode.l != pr.signal.l + pr.idler.l || c.coefficient == Complex(0.0)) continue;
            const auto values = engine.spectrum(c.mode, pr.signal, pr.idler, detunings, pump.spectrum);
            for (std::size_t k = 0; k < n; ++k) out[a * n + k] += c.coefficient * values[k].value;
        }
    });
    return out;
}

}  // namespace

double omega_from_wavelength(double wavelength, double center_wavelength) {
    if (!(wavelength > 0.0) || !(center_wavelength > 0.0)) throw DomainError("wavelength must be positive");
    return kTwoPiC * (1.0 / wavelength - 1.0 / center_wavelength);
}

double wavelength_from_omega(double omega, double center_wavelength) {
    const double w = kTwoPiC / center_wavelength + omega;
    if (!(w > 0.0)) throw DomainError("detuning exceeds the carrier frequency");
    return kTwoPiC / w;
}

void OmegaGrid::validate() const {
    if (nodes.empty() || nodes.size() != weights.size()) throw DomainError("malformed frequency grid");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw DomainError("frequency grid weights must be positive");
        sum += w;
    }
    if (nodes.size() > 1) {
        const double span = nodes.back() - nodes.front();
        if (!(span > 0.0) || std::abs(sum - span) > 0.5 * span) {
            throw DomainError("frequency grid weights do not match its span");
        }
    }
}

OmegaGrid OmegaGrid::gauss_legendre(int n, double omega_max) {
    if (!(omega_max > 0.0)) throw DomainError("frequency grid span must be positive");
    const QuadratureRule r = lgspdc::gauss_legendre(n, -omega_max, omega_max);
    return {r.nodes, r.weights};
}

OmegaGrid OmegaGrid::wavelength_span(double center, double half_span, int n) {
    if (!(half_span > 0.0) || !(half_span < center)) throw DomainError("wavelength span out of range");
    // The short-wavelength side is the wider one in Ω.
    return gauss_legendre(n, omega_from_wavelength(center - half_span, center));
}

double filter_omega_limit(double center, double bandwidth) {
    if (!(bandwidth > 0.0)) throw DomainError("filter bandwidth must be positive");
    // Both λ_s and λ_i inside center ± bandwidth/2: the long-wavelength edge binds.
    return -omega_from_wavelength(center + 0.5 * bandwidth, center);
}

OmegaGrid OmegaGrid::filter_window(double center, double bandwidth, int n) {
    return gauss_legendre(n, filter_omega_limit(center, bandwidth));
}

OmegaGrid OmegaGrid::composite(double omega_max, int panels, int order) {
    if (!(omega_max > 0.0)) throw DomainError("frequency grid span must be positive");
    const QuadratureRule r = composite_gauss_legendre(panels, order, -omega_max, omega_max);
    return {r.nodes, r.weights};
}

OmegaGrid OmegaGrid::single(double omega) { return {{omega}, {1.0}}; }

Complex BiphotonState::at(const ModePair& pair, std::size_t node) const {
    const auto it = std::lower_bound(pairs.begin(), pairs.end(), pair);
    if (it == pairs.end() || *it != pair) return 0.0;
    return amplitude(static_cast<std::size_t>(it - pairs.begin()), node);
}

double BiphotonState::total_weight() const {
    double total = 0.0;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        for (std::size_t k = 0; k < grid.size(); ++k) total += grid.weights[k] * std::norm(amplitude(a, k));
    }
    return total;
}

void BiphotonState::validate() const {
    grid.validate();
    if (amplitudes.size() != pairs.size() * grid.size() || center.size() != pairs.size()) {
        throw DomainError("state tensor has inconsistent dimensions");
    }
    if (!std::is_sorted(pairs.begin(), pairs.end())) throw DomainError("state pairs must be sorted");
}

std::vector<SweepPoint> purity_sweep(const PumpSpec& pump_spec, const Truncation& truncation,
                                     const BeamGeometry& geometry, const CrystalSpec& crystal,
                                     std::span<const double> bandwidths, FilterShape shape,
                                     double resolution, const StateOptions& options) {
    if (!(resolution > 0.0)) throw DomainError("sweep resolution must be positive");
    const PumpSpec pump = pump_spec.normalized();
    if (pump.spectrum.kind != SpectralModel::Kind::cw) {
        throw DomainError("purity sweeps require a continuous-wave pump");
    }
    const double center = 2.0 * pump.wavelength;
    // Rectangular: the exact window both arms pass. Gaussian: four FWHM, reweighted.
    std::vector<OmegaGrid> grids;
    std::vector<double> omegas;
    for (double bw : bandwidths) {
        const double width = shape == FilterShape::rectangular ? bw : 4.0 * bw;
        grids.push_back(OmegaGrid::composite(filter_omega_limit(center, width), std::max(2, static_cast<int>(std::ceil(width / resolution)))));
        omegas.insert(omegas.end(), grids.back().nodes.begin(), grids.back().nodes.end());
    }
    const std::vector<ModePair> pairs = allowed_pairs(pump, truncation);
    const std::vector<Complex> values = pair_spectra(pump, truncation, pairs, omegas, geometry, crystal, options);

    std::vector<SweepPoint> out;
    std::size_t offset = 0;
    for (std::size_t b = 0; b < bandwidths.size(); ++b) {
        BiphotonState s;
        s.grid = grids[b];
        s.pairs = pairs;
        s.center_wavelength = center;
        s.center.assign(pairs.size(), 0.0);
        const std::size_t n = s.grid.size();
        for (std::size_t a = 0; a < pairs.size(); ++a) {
            for (std::size_t k = 0; k < n; ++k) s.amplitudes.push_back(values[a * omegas.size() + offset + k]);
        }
        offset += n;
        collect_bases(s);
        renormalize(s);
        if (shape == FilterShape::gaussian) s = apply_spectral_filter(s, bandwidths[b], shape);
        out.push_back({bandwidths[b], purity(spatial_overlap_matrix(s))});
    }
    return out;
}

std::vector<ModePair> product_subspace(std::span<const ModeIndex> signal_modes,
                                       std::span<const ModeIndex> idler_modes) {
    std::vector<ModePair> out;
    for (const auto& s : signal_modes) {
        for (const auto& i : idler_modes) out.push_back({s, i});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BiphotonState build_state(const PumpSpec& pump_spec, const Truncation& truncation, const OmegaGrid& grid,
                          const BeamGeometry& geometry, const CrystalSpec& crystal,
                          const StateOptions& options) {
    const PumpSpec pump = pump_spec.normalized();
    grid.validate();
    if (pump.spectrum.kind != SpectralModel::Kind::cw) {
        throw DomainError("biphoton state assembly requires a continuous-wave pump");
    }

    BiphotonState state;
    state.grid = grid;
    state.center_wavelength = 2.0 * pump.wavelength;

    state.pairs = allowed_pairs(pump, truncation);
    collect_bases(state);

    // One column beyond the grid holds Ω = 0.
    std::vector<double> omegas = grid.nodes;
    omegas.push_back(0.0);
    const std::size_t n = grid.size(), np = state.pairs.size();
    const std::vector<Complex> values = pair_spectra(pump, truncation, state.pairs, omegas, geometry, crystal, options);
    state.amplitudes.assign(np * n, 0.0);
    state.center.assign(np, 0.0);
    for (std::size_t a = 0; a < np; ++a) {
        for (std::size_t k = 0; k < n; ++k) state.amplitudes[a * n + k] = values[a * (n + 1) + k];
        state.center[a] = values[a * (n + 1) + n];
    }

    if (options.edge_check && n > 1) {
        std::vector<double> density(n, 0.0);
        for (std::size_t a = 0; a < np; ++a) {
            for (std::size_t k = 0; k < n; ++k) density[k] += std::norm(state.amplitude(a, k));
        }
        const double peak = *std::max_element(density.begin(), density.end());
        const double edge = std::max(density.front(), density.back());
        if (peak > 0.0 && edge > options.edge_threshold * peak) {
            throw GridError("spectral density at the grid edge is " + std::to_string(edge / peak) +
                            " of its peak; widen the frequency grid");
        }
    }
    renormalize(state);
    return state;
}

BiphotonState project(const BiphotonState& state, std::span<const ModePair> subspace) {
    std::vector<ModePair> wanted(subspace.begin(), subspace.end());
    std::sort(wanted.begin(), wanted.end());
    BiphotonState out;
    out.grid = state.grid;
    out.norm = state.norm;
    out.center_wavelength = state.center_wavelength;
    const std::size_t n = state.grid.size();
    for (std::size_t a = 0; a < state.pairs.size(); ++a) {
        if (!std::binary_search(wanted.begin(), wanted.end(), state.pairs[a])) continue;
        out.pairs.push_back(state.pairs[a]);
        out.center.push_back(state.center[a]);
        for (std::size_t k = 0; k < n; ++k) out.amplitudes.push_back(state.amplitude(a, k));
    }
    if (out.pairs.empty()) throw EmptySubspaceError("no populated mode pair lies in the subspace");
    collect_bases(out);
    renormalize(out);
    return out;
}

SpatialDensityMatrix spatial_overlap_matrix(const BiphotonState& state) {
    const std::size_t np = state.pairs.size(), n = state.grid.size();
    Eigen::MatrixXcd c(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < np; ++a) {
        for (std::size_t k = 0; k < n; ++k) {
            c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) =
                std::sqrt(state.grid.weights[k]) * state.amplitude(a, k);
        }
    }
    SpatialDensityMatrix dm{state.pairs, c * c.adjoint()};
    // Exact Hermitian symmetry and unit trace.
    dm.entries = 0.5 * (dm.entries + dm.entries.adjoint()).eval();
    const double trace = dm.entries.trace().real();
    if (!(trace > 0.0)) throw EmptySubspaceError("state has zero norm");
    dm.entries /= trace;
    return dm;
}

DensityMatrixCheck check_density_matrix(const Eigen::MatrixXcd& rho) {
    DensityMatrixCheck r;
    r.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    r.trace_error = std::abs(rho.trace() - Complex(1.0));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

double purity(const Eigen::MatrixXcd& rho) { return rho.cwiseAbs2().sum(); }

double purity(const SpatialDensityMatrix& dm) { return purity(dm.entries); }

double schmidt_number_from_weights(std::span<const double> weights) {
    double sum = 0.0, sq = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("Schmidt weights must be nonnegative");
        sum += w;
        sq += w * w;
    }
    if (!(sum > 0.0)) throw EmptySubspaceError("Schmidt decomposition of a zero state");
    return sum * sum / sq;
}

double schmidt_number_subspace(const BiphotonState& state, std::span<const ModePair> subspace,
                               const SchmidtOptions& options) {
    if (subspace.empty()) throw EmptySubspaceError("empty subspace");
    const BiphotonState sub = project(state, subspace);
    if (!options.spectrally_traced) {
        const Eigen::MatrixXcd m = pair_matrix(sub, [&](std::size_t a) { return sub.center[a]; });
        if (m.cwiseAbs2().sum() == 0.0) throw EmptySubspaceError("subspace amplitudes vanish at Ω = 0");
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
        std::vector<double> w(static_cast<std::size_t>(sv.size()));
        for (Eigen::Index k = 0; k < sv.size(); ++k) w[static_cast<std::size_t>(k)] = sv[k] * sv[k];
        return schmidt_number_from_weights(w);
    }
    // Reduced signal matrix of the Ω-traced spatial state: Σ_k w_k M_k M_k†.
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sub.signal_modes.size()),
                                                  static_cast<Eigen::Index>(sub.signal_modes.size()));
    for (std::size_t k = 0; k < sub.grid.size(); ++k) {
        const Eigen::MatrixXcd m = pair_matrix(sub, [&](std::size_t a) { return sub.amplitude(a, k); });
        rho += sub.grid.weights[k] * m * m.adjoint();
    }
    rho /= rho.trace().real();
    return 1.0 / purity(rho);
}

double schmidt_number_full(const BiphotonState& state) {
    // ρ_signal is block diagonal in the Ω nodes since each idler node is orthogonal.
    double trace = 0.0, trace_sq = 0.0;
    for (std::size_t k = 0; k < state.grid.size(); ++k) {
        const Eigen::MatrixXcd m = pair_matrix(state, [&](std::size_t a) { return state.amplitude(a, k); });
        const Eigen::MatrixXcd block = state.grid.weights[k] * m * m.adjoint();
        trace += block.trace().real();
        trace_sq += block.cwiseAbs2().sum();
    }
    if (!(trace > 0.0)) throw EmptySubspaceError("state has zero norm");
    return trace * trace / trace_sq;
}

double schmidt_number_center(const BiphotonState& state) {
    const Eigen::MatrixXcd m = pair_matrix(state, [&](std::size_t a) { return state.center[a]; });
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
    std::vector<double> w(static_cast<std::size_t>(sv.size()));
    for (Eigen::Index k = 0; k < sv.size(); ++k) w[static_cast<std::size_t>(k)] = sv[k] * sv[k];
    return schmidt_number_from_weights(w);
}

double filter_transmission(double wavelength, double center, double bandwidth, FilterShape shape) {
    if (!(bandwidth > 0.0)) throw DomainError("filter bandwidth must be positive");
    const double x = wavelength - center;
    if (shape == FilterShape::rectangular) return std::abs(x) <= 0.5 * bandwidth ? 1.0 : 0.0;
    return std::exp(-4.0 * std::numbers::ln2 * x * x / (bandwidth * bandwidth));
}

BiphotonState apply_spectral_filter(const BiphotonState& state, double bandwidth, FilterShape shape) {
    if (!(bandwidth > 0.0)) throw DomainError("filter bandwidth must be positive");
    const std::size_t n = state.grid.size();
    std::vector<double> amplitude_factor(n);
    bool identity = true;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = state.grid.nodes[k];
        const double t = filter_transmission(wavelength_from_omega(w, state.center_wavelength),
                                             state.center_wavelength, bandwidth, shape) *
                         filter_transmission(wavelength_from_omega(-w, state.center_wavelength),
                                             state.center_wavelength, bandwidth, shape);
        amplitude_factor[k] = std::sqrt(t);
        if (t != 1.0) identity = false;
    }
    if (identity) return state;

    BiphotonState out = state;
    for (std::size_t a = 0; a < state.pairs.size(); ++a) {
        for (std::size_t k = 0; k < n; ++k) out.amplitudes[a * n + k] *= amplitude_factor[k];
    }
    const double total = out.total_weight();
    if (!(total >= 1e-12 * state.total_weight())) {
        throw DegenerateFilterError("filter transmits no part of the spectrum on this grid");
    }
    renormalize(out);
    return out;
}

void write_state_csv(std::ostream& out, const BiphotonState& state) {
    out << "p_s,l_s,p_i,l_i,omega,re,im\n";
    char line[256];
    for (std::size_t a = 0; a < state.pairs.size(); ++a) {
        const auto& p = state.pairs[a];
        for (std::size_t k = 0; k < state.grid.size(); ++k) {
            const Complex c = state.amplitude(a, k);
            std::snprintf(line, sizeof line, "%d,%d,%d,%d,%.17g,%.17g,%.17g\n", p.signal.p, p.signal.l,
                          p.idler.p, p.idler.l, state.grid.nodes[k], c.real(), c.imag());
            out << line;
        }
    }
}

namespace {

constexpr char kMagic[8] = {'L', 'G', 'S', 'P', 'D', 'C', 'S', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DomainError("truncated state dump");
    return v;
}

}  // namespace

void write_state_binary(std::ostream& out, const BiphotonState& state) {
    out.write(kMagic, sizeof kMagic);
    put(out, kFormatVersion);
    put(out, static_cast<std::uint64_t>(state.pairs.size()));
    put(out, static_cast<std::uint64_t>(state.grid.size()));
    put(out, state.norm);
    put(out, state.center_wavelength);
    for (std::size_t k = 0; k < state.grid.size(); ++k) {
        put(out, state.grid.nodes[k]);
        put(out, state.grid.weights[k]);
    }
    for (std::size_t a = 0; a < state.pairs.size(); ++a) {
        const auto& p = state.pairs[a];
        for (std::int32_t v : {p.signal.p, p.signal.l, p.idler.p, p.idler.l}) put(out, v);
        put(out, state.center[a].real());
        put(out, state.center[a].imag());
    }
    for (const auto& c : state.amplitudes) {
        put(out, c.real());
        put(out, c.imag());
    }
}

BiphotonState read_state_binary(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw DomainError("not a state dump");
    if (get<std::uint32_t>(in) != kFormatVersion) throw DomainError("unsupported state dump version");
    const auto np = get<std::uint64_t>(in), n = get<std::uint64_t>(in);
    BiphotonState s;
    s.norm = get<double>(in);
    s.center_wavelength = get<double>(in);
    for (std::uint64_t k = 0; k < n; ++k) {
        s.grid.nodes.push_back(get<double>(in));
        s.grid.weights.push_back(get<double>(in));
    }
    for (std::uint64_t a = 0; a < np; ++a) {
        ModePair p;
        p.signal.p = get<std::int32_t>(in);
        p.signal.l = get<std::int32_t>(in);
        p.idler.p = get<std::int32_t>(in);
        p.idler.l = get<std::int32_t>(in);
        s.pairs.push_back(p);
        const double re = get<double>(in);
        s.center.emplace_back(re, get<double>(in));
    }
    s.amplitudes.reserve(np * n);
    for (std::uint64_t j = 0; j < np * n; ++j) {
        const double re = get<double>(in);
        s.amplitudes.emplace_back(re, get<double>(in));
    }
    collect_bases(s);
    s.validate();
    return s;
}

}  // namespace lgspdc
