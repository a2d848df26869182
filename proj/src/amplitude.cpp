#include "lgspdc/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <limits>
#include <tuple>

#include "lgspdc/errors.hpp"
#include "lgspdc/quadrature.hpp"

namespace lgspdc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPanelOrder = 8;
constexpr int kFirstInterpolationNodes = 33;

using Real = long double;
using CExt = std::complex<Real>;

Real factorial(int n) {
    Real f = 1;
    for (int k = 2; k <= n; ++k) f *= Real(k);
    return f;
}

Real binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// T_u^{p,l} / i^l in extended precision.
Real t_real(int u, ModeIndex mode, Real waist) {
    const int p = mode.p, al = std::abs(mode.l);
    const Real pi = std::numbers::pi_v<Real>;
    const Real sign = ((p + u) % 2 == 0) ? 1 : -1;
    return sign * std::sqrt(factorial(p) * factorial(p + al) / pi) *
           std::pow(waist / std::sqrt(Real(2)), 2 * u + al + 1) /
           (factorial(p - u) * factorial(al + u) * factorial(u));
}

int half_exponent_h(int l, int li, int ls, const SummationIndex& x) {
    return 2 + 2 * x.s + l + li + 2 * (x.u - x.f) - 2 * x.n - 2 * x.v + std::abs(ls);
}

int half_exponent_b(int li, const SummationIndex& x) {
    return 2 + 2 * x.f + 2 * x.i + li + 2 * x.m - 2 * x.v + std::abs(li);
}

template <class C>
C ipow(C x, int n) {
    if (n < 0) return C(1) / ipow(x, -n);
    C r = 1;
    while (n) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

// Lengths in units of the pump waist, wavenumbers times the pump waist.
struct Scaled {
    Real wp, ws, wi, kp, ks, ki;
    double length, unit;

    Scaled(const BeamGeometry& g, const CrystalSpec& c) {
        unit = g.waist_pump;
        wp = 1;
        ws = Real(g.waist_signal) / unit;
        wi = Real(g.waist_idler) / unit;
        kp = Real(c.pump.wavenumber) * unit;
        ks = Real(c.signal.wavenumber) * unit;
        ki = Real(c.idler.wavenumber) * unit;
        length = c.length / unit;
    }

    CExt H(Real z) const { return CExt((wp * wp + ws * ws) / 4, -z * (kp - ks) / (2 * kp * ks)); }
    CExt B(Real z) const { return CExt((wp * wp + wi * wi) / 4, -z * (kp - ki) / (2 * kp * ki)); }
    CExt D(Real z) const { return CExt(-wp * wp / 4, -z / (2 * kp)); }
};

struct TermGroup {
    int d, h, b;
    Real coefficient;
};

// All terms of the nested sum for one triplet (pump l >= 0), merged by (d, h, b).
// With l = l_s + l_i the phases i^l (-i)^{l_s} (-i)^{l_i} multiply to 1, so every
// coefficient is real.
std::vector<TermGroup> collect_terms(ModeIndex P, ModeIndex S, ModeIndex I, const Scaled& sc) {
    const int l = P.l, ls = S.l, li = I.l;
    std::map<std::tuple<int, int, int>, Real> groups;
    for (int u = 0; u <= P.p; ++u) {
        const Real tu = t_real(u, P, sc.wp);
        for (int s = 0; s <= S.p; ++s) {
            const Real ts = t_real(s, S, sc.ws);
            for (int i = 0; i <= I.p; ++i) {
                const Real c0 = tu * ts * t_real(i, I, sc.wi);
                for (int n = 0; n <= l; ++n)
                    for (int m = 0; m <= u; ++m)
                        for (int f = 0; f <= u - m; ++f)
                            for (int v = 0; v <= m; ++v) {
                                const SummationIndex x{u, s, i, n, m, f, v};
                                const int d = li + m - n - 2 * v;
                                const int h = half_exponent_h(l, li, ls, x) / 2;
                                const int b = half_exponent_b(li, x) / 2;
                                groups[{d, h, b}] += c0 * binomial(l, n) * binomial(u, m) *
                                                     binomial(u - m, f) * binomial(m, v);
                            }
            }
        }
    }
    const Real pi2 = std::numbers::pi_v<Real> * std::numbers::pi_v<Real>;
    std::vector<TermGroup> out;
    out.reserve(groups.size());
    for (const auto& [key, c] : groups) {
        const auto [d, h, b] = key;
        out.push_back({d, h, b, pi2 * c * factorial(h - 1) * factorial(b - 1)});
    }
    return out;
}

// Ω-independent z-profile g(z) of one triplet, sampled on Chebyshev points.
struct Kernel {
    std::vector<Complex> samples;
    double interpolation_error = 0.0;  // ∫ of the truncated Chebyshev tail
    double rounding_error = 0.0;       // ∫ of the integrand's own error bound
};

struct KernelEvaluator {
    const Scaled& sc;
    const std::vector<TermGroup>& terms;
    Hyp2f1Options hyp;
    int min_d = 0, max_d = 0, max_h = 0, max_b = 0;

    KernelEvaluator(const Scaled& s, const std::vector<TermGroup>& t, const Hyp2f1Options& o)
        : sc(s), terms(t), hyp(o) {
        hyp.tolerance = std::min(hyp.tolerance, 1e-19);
        for (const auto& g : terms) {
            min_d = std::min(min_d, g.d);
            max_d = std::max(max_d, g.d);
            max_h = std::max(max_h, g.h);
            max_b = std::max(max_b, g.b);
        }
    }

    // g(z); `error` receives an absolute bound from series truncation and rounding.
    Complex operator()(double z, double& error) const {
        const CExt H = sc.H(z), B = sc.B(z), D = sc.D(z);
        const CExt x = D * D / (H * B);
        if (!(std::abs(x) < 1)) {
            throw AccuracyError("hypergeometric argument D^2/(HB) left the unit disk",
                                double(std::abs(x)));
        }
        std::vector<CExt> dpow(max_d - min_d + 1), hpow(max_h + 1), bpow(max_b + 1);
        const CExt invH = Real(1) / H, invB = Real(1) / B;
        for (int k = min_d; k <= max_d; ++k) dpow[k - min_d] = ipow(D, k);
        hpow[0] = bpow[0] = 1;
        for (int k = 1; k <= max_h; ++k) hpow[k] = hpow[k - 1] * invH;
        for (int k = 1; k <= max_b; ++k) bpow[k] = bpow[k - 1] * invB;
        CExt total = 0;
        Real bound = 0;
        const Real eps = std::numeric_limits<Real>::epsilon();
        for (const auto& g : terms) {
            const Hyp2f1ResultExt f =
                hyp2f1_regularized_extended(Real(g.h), Real(g.b), Real(1 + g.d), x, hyp);
            const CExt t = g.coefficient * dpow[g.d - min_d] * hpow[g.h] * bpow[g.b] * f.value;
            total += t;
            bound += std::abs(t) * (Real(f.error) + 16 * eps * (g.h + g.b + std::abs(g.d) + 4));
        }
        error = double(bound + 8 * eps * std::abs(total)) + 4e-16 * double(std::abs(total));
        return {double(total.real()), double(total.imag())};
    }
};

Kernel build_kernel(const KernelEvaluator& eval, double half_length, double tolerance,
                    int max_nodes, int& nodes_used) {
    Kernel k;
    std::vector<Complex> samples;
    std::vector<double> errors;
    int n = kFirstInterpolationNodes;
    {
        ChebyshevInterpolant cheb(n, -half_length, half_length);
        samples.resize(n);
        errors.resize(n);
        for (int j = 0; j < n; ++j) samples[j] = eval(cheb.nodes()[j], errors[j]);
    }
    for (;;) {
        ChebyshevInterpolant cheb(n, -half_length, half_length);
        const auto c = cheb.coefficients(samples);
        double peak = 0.0;
        for (const auto& v : c) peak = std::max(peak, std::abs(v));
        const double noise = *std::max_element(errors.begin(), errors.end());
        const double tail = std::abs(c[n - 1]) + std::abs(c[n - 2]);
        if (tail <= std::max(1e-3 * tolerance * peak, 4.0 * noise) || peak == 0.0) {
            k.samples = std::move(samples);
            k.interpolation_error = tail * 2.0 * half_length;
            k.rounding_error = noise * 2.0 * half_length;
            nodes_used = n;
            break;
        }
        if (n >= max_nodes) {
            throw AccuracyError("z-profile not resolved by Chebyshev interpolation",
                                peak > 0.0 ? tail / peak : tail);
        }
        const int m = 2 * n - 1;
        ChebyshevInterpolant finer(m, -half_length, half_length);
        std::vector<Complex> next(m);
        std::vector<double> next_err(m);
        for (int j = 0; j < m; ++j) {
            if (j % 2 == 0) {
                next[j] = samples[j / 2];
                next_err[j] = errors[j / 2];
            } else {
                next[j] = eval(finer.nodes()[j], next_err[j]);
            }
        }
        samples = std::move(next);
        errors = std::move(next_err);
        n = m;
    }
    return k;
}

int panel_count(double delta_omega, double length) {
    return std::max(8, static_cast<int>(std::ceil(std::abs(delta_omega) * length / kPi)) * 4);
}

// ∫ e^{izΔ} l_j(z) dz for the Chebyshev basis, by composite Gauss–Legendre at
// two resolutions (panel doubling gives the error estimate).
struct Weights {
    std::vector<Complex> coarse, fine;
    std::vector<double> magnitude;  // ∫ l_j(z) dz, for ∫|g|
};

Weights make_weights(int n, double delta_omega, double half_length) {
    const ChebyshevInterpolant cheb(n, -half_length, half_length);
    const int panels = std::max(panel_count(delta_omega, 2.0 * half_length), (n + 7) / 8);
    Weights w;
    w.coarse.assign(n, 0.0);
    w.fine.assign(n, 0.0);
    w.magnitude.assign(n, 0.0);
    std::vector<double> basis(n);
    auto accumulate = [&](int p, std::vector<Complex>& out, bool with_magnitude) {
        const QuadratureRule rule = composite_gauss_legendre(p, kPanelOrder, -half_length, half_length);
        for (std::size_t f = 0; f < rule.size(); ++f) {
            cheb.basis(rule.nodes[f], basis);
            const Complex phase = rule.weights[f] * std::polar(1.0, rule.nodes[f] * delta_omega);
            for (int j = 0; j < n; ++j) {
                out[j] += phase * basis[j];
                if (with_magnitude) w.magnitude[j] += rule.weights[f] * basis[j];
            }
        }
    };
    accumulate(panels, w.coarse, false);
    accumulate(2 * panels, w.fine, true);
    return w;
}

void check_truncation(const Truncation& t, ModeIndex P, ModeIndex S, ModeIndex I) {
    for (ModeIndex m : {P, S, I}) {
        if (m.p < 0) throw DomainError("radial index p must be non-negative");
        if (!t.contains(m)) {
            std::ostringstream os;
            os << "mode (p=" << m.p << ", l=" << m.l << ") outside truncation p <= " << t.p_max
               << ", |l| <= " << t.l_max;
            throw TruncationError(os.str());
        }
    }
}

double cw_mismatch(Detunings d) {
    return std::abs(d.signal + d.idler) / std::max({1.0, std::abs(d.signal), std::abs(d.idler)});
}

}  // namespace

double SpectralModel::envelope(Detunings d) const {
    if (kind == Kind::cw) return 1.0;
    const double sum = d.signal + d.idler;
    return duration / std::sqrt(kPi) * std::exp(-0.25 * duration * duration * sum * sum);
}

void SpectralModel::validate() const {
    if (kind == Kind::pulsed && !(duration > 0.0)) {
        throw DomainError("pulse duration must be positive");
    }
}

void PumpSpec::validate(double tolerance) const {
    if (components.empty()) throw DomainError("pump has no components");
    double norm = 0.0;
    for (const auto& c : components) {
        if (c.mode.p < 0) throw DomainError("pump radial index must be non-negative");
        norm += std::norm(c.coefficient);
    }
    if (std::abs(norm - 1.0) > tolerance) {
        std::ostringstream os;
        os << "pump coefficients are not normalised: sum |a|^2 = " << norm;
        throw DomainError(os.str());
    }
    spectrum.validate();
    if (!(wavelength > 0.0)) throw DomainError("pump wavelength must be positive");
}

PumpSpec PumpSpec::normalized() const {
    double norm = 0.0;
    for (const auto& c : components) norm += std::norm(c.coefficient);
    if (!(norm > 0.0)) throw DomainError("pump coefficients are all zero");
    PumpSpec out = *this;
    for (auto& c : out.components) c.coefficient /= std::sqrt(norm);
    return out;
}

ZIntegrandCoefficients z_coefficients(double z, const AmplitudeRequest& req,
                                      const SummationIndex& x) {
    const ModeIndex P = req.pump_mode, S = req.signal_mode, I = req.idler_mode;
    if (P.l < 0) throw DomainError("z_coefficients expects a pump with l >= 0");
    if (P.l != S.l + I.l) throw DomainError("z_coefficients: tuple violates OAM conservation");
    if (x.u < 0 || x.u > P.p || x.s < 0 || x.s > S.p || x.i < 0 || x.i > I.p || x.n < 0 ||
        x.n > P.l || x.m < 0 || x.m > x.u || x.f < 0 || x.f > x.u - x.m || x.v < 0 || x.v > x.m) {
        throw DomainError("summation index outside its range");
    }
    const auto& c = req.crystal;
    const auto& g = req.geometry;
    const double kp = c.pump.wavenumber, ks = c.signal.wavenumber, ki = c.idler.wavenumber;
    ZIntegrandCoefficients out;
    out.H = 0.25 * (g.waist_pump * g.waist_pump + g.waist_signal * g.waist_signal) -
            Complex(0.0, z * (kp - ks) / (2.0 * kp * ks));
    out.B = 0.25 * (g.waist_pump * g.waist_pump + g.waist_idler * g.waist_idler) -
            Complex(0.0, z * (kp - ki) / (2.0 * kp * ki));
    out.D = -0.25 * g.waist_pump * g.waist_pump - Complex(0.0, z / (2.0 * kp));
    out.d = I.l + x.m - x.n - 2 * x.v;
    out.h = 0.5 * half_exponent_h(P.l, I.l, S.l, x);
    out.b = 0.5 * half_exponent_b(I.l, x);
    return out;
}

Complex z_integrand(double z, const AmplitudeRequest& req, const SummationIndex& idx) {
    const ZIntegrandCoefficients c = z_coefficients(z, req, idx);
    const Complex x = c.hypergeometric_argument();
    if (!(std::abs(x) < 1.0)) {
        throw AccuracyError("hypergeometric argument D^2/(HB) left the unit disk", std::abs(x));
    }
    // Evaluate the powers in units of the pump waist, then restore the scale.
    const double unit = req.geometry.waist_pump;
    const double u2 = unit * unit;
    const int d = int(c.d), h = int(c.h), b = int(c.b);
    const Complex ratio = ipow(c.D / u2, d) / (ipow(c.H / u2, h) * ipow(c.B / u2, b));
    const double rescale = std::exp(2.0 * (d - h - b) * std::log(unit));
    const double dOmega = delta_omega(req.detunings, req.crystal);
    return std::polar(1.0, z * dOmega) * ratio * rescale *
           hyp2f1_regularized(c.h, c.b, 1.0 + c.d, x);
}

struct AmplitudeEngine::WeightCache {
    std::mutex mutex;
    std::map<std::pair<int, double>, std::shared_ptr<const Weights>> entries;
};

AmplitudeEngine::AmplitudeEngine(BeamGeometry geometry, CrystalSpec crystal, AmplitudeOptions options)
    : geometry_(geometry), crystal_(crystal), options_(options),
      cache_(std::make_unique<WeightCache>()) {
    geometry_.validate();
    if (!(crystal_.length > 0.0)) throw DomainError("crystal length must be positive");
}

AmplitudeEngine::~AmplitudeEngine() = default;

AmplitudeResult AmplitudeEngine::amplitude(ModeIndex pump, ModeIndex signal, ModeIndex idler,
                                           Detunings detunings, const SpectralModel& model) const {
    return spectrum(pump, signal, idler, std::span(&detunings, 1), model).front();
}

std::vector<AmplitudeResult> AmplitudeEngine::spectrum(ModeIndex P, ModeIndex S, ModeIndex I,
                                                       std::span<const Detunings> detunings,
                                                       const SpectralModel& model) const {
    check_truncation(options_.truncation, P, S, I);
    model.validate();
    std::vector<AmplitudeResult> out(detunings.size());
    if (P.l != S.l + I.l) {
        for (auto& r : out) r.forbidden = true;
        return out;
    }
    if (model.kind == SpectralModel::Kind::cw) {
        for (const auto& d : detunings) {
            if (cw_mismatch(d) > 1e-12) {
                throw DomainError("continuous-wave pump requires idler detuning = -signal detuning");
            }
        }
    }
    // C^{-l,-l_s,-l_i} = conj(C^{l,l_s,l_i}); evaluate a canonical sign so both are bitwise related.
    const bool conjugate = P.l < 0 || (P.l == 0 && (S.l < 0 || (S.l == 0 && I.l < 0)));
    if (conjugate) {
        P.l = -P.l;
        S.l = -S.l;
        I.l = -I.l;
    }

    const Scaled sc(geometry_, crystal_);
    const auto terms = collect_terms(P, S, I, sc);
    const KernelEvaluator eval(sc, terms, options_.hyp2f1);
    int n = 0;
    const Kernel kernel =
        build_kernel(eval, 0.5 * sc.length, options_.tolerance, options_.max_interpolation_nodes, n);

    for (std::size_t k = 0; k < detunings.size(); ++k) {
        const double dOmega = delta_omega(detunings[k], crystal_) * sc.unit;
        std::shared_ptr<const Weights> w;
        {
            std::lock_guard lock(cache_->mutex);
            auto it = cache_->entries.find({n, dOmega});
            if (it != cache_->entries.end()) w = it->second;
        }
        if (!w) {
            w = std::make_shared<const Weights>(make_weights(n, dOmega, 0.5 * sc.length));
            std::lock_guard lock(cache_->mutex);
            if (cache_->entries.size() > 8192) cache_->entries.clear();
            cache_->entries.emplace(std::pair(n, dOmega), w);
        }
        Complex coarse = 0.0, fine = 0.0;
        double scale = 0.0;
        for (int j = 0; j < n; ++j) {
            coarse += w->coarse[j] * kernel.samples[j];
            fine += w->fine[j] * kernel.samples[j];
            scale += w->magnitude[j] * std::abs(kernel.samples[j]);
        }
        const double error = std::abs(fine - coarse) + kernel.interpolation_error + kernel.rounding_error;
        if (error > std::max(options_.tolerance * scale, options_.absolute_tolerance)) {
            throw AccuracyError("amplitude error estimate exceeds the budget",
                                scale > 0.0 ? error / scale : error);
        }
        const double env = model.envelope(detunings[k]);
        AmplitudeResult& r = out[k];
        r.value = env * (conjugate ? std::conj(fine) : fine);
        r.error_estimate = env * error;
        r.scale = env * scale;
    }
    return out;
}

AmplitudeResult coincidence_amplitude_detailed(const AmplitudeRequest& req,
                                               const AmplitudeOptions& options) {
    AmplitudeEngine engine(req.geometry, req.crystal, options);
    return engine.amplitude(req.pump_mode, req.signal_mode, req.idler_mode, req.detunings,
                            req.spectrum);
}

Complex amplitude_for_pump(const PumpSpec& pump, ModeIndex signal, ModeIndex idler,
                           Detunings detunings, const AmplitudeEngine& engine) {
    pump.validate(1e-12);
    Complex total = 0.0;
    for (const auto& c : pump.components) {
        if (c.mode.l != signal.l + idler.l || c.coefficient == Complex(0.0)) continue;
        total += c.coefficient *
                 engine.amplitude(c.mode, signal, idler, detunings, pump.spectrum).value;
    }
    return total;
}

Complex amplitude_for_pump(const PumpSpec& pump, ModeIndex signal, ModeIndex idler,
                           Detunings detunings, const BeamGeometry& geometry,
                           const CrystalSpec& crystal, const AmplitudeOptions& options) {
    AmplitudeEngine engine(geometry, crystal, options);
    return amplitude_for_pump(pump, signal, idler, detunings, engine);
}

void require_matched_gouy_geometry(const BeamGeometry& g, const CrystalSpec& c, double tol) {
    const RayleighLengths z = g.rayleigh_lengths(c);
    auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); };
    if (!close(z.pump, z.signal) || !close(z.pump, z.idler)) {
        throw PreconditionError("Gouy reduction requires equal Rayleigh lengths for pump, signal and idler");
    }
    if (!close(c.pump.wavenumber, 2.0 * c.signal.wavenumber) ||
        !close(c.pump.wavenumber, 2.0 * c.idler.wavenumber)) {
        throw PreconditionError("Gouy reduction requires k_p = 2 k_s = 2 k_i");
    }
}

Complex gouy_reduced_amplitude(int nr, Detunings detunings, const BeamGeometry& geometry,
                               const CrystalSpec& crystal, double tolerance) {
    require_matched_gouy_geometry(geometry, crystal);
    if (nr % 2 != 0) throw DomainError("relative mode number must be even");
    const int M = -nr / 2;
    const double a = crystal.pump.wavenumber * geometry.waist_pump * geometry.waist_pump;
    const double dOmega = delta_omega(detunings, crystal);
    const double half = 0.5 * crystal.length;
    auto integrate = [&](int panels) {
        const QuadratureRule rule = composite_gauss_legendre(panels, kPanelOrder, -half, half);
        Complex sum = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double z = rule.nodes[k];
            sum += rule.weights[k] * std::polar(1.0, z * dOmega) *
                   ipow(Complex(a, 2.0 * z), M) / ipow(Complex(a, -2.0 * z), M + 1);
        }
        return sum;
    };
    int panels = panel_count(dOmega, crystal.length);
    Complex coarse = integrate(panels);
    for (int attempt = 0; attempt < 6; ++attempt) {
        const Complex fine = integrate(2 * panels);
        if (std::abs(fine - coarse) <= tolerance * std::max(std::abs(fine), crystal.length / a)) {
            return fine;
        }
        coarse = fine;
        panels *= 2;
    }
    throw AccuracyError("reduced Gouy integral did not converge", std::abs(coarse));
}

}  // namespace lgspdc
