#include "lgspdc/specialfn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>
#include <utility>

#include "lgspdc/errors.hpp"

namespace lgspdc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// B_{2k} / (2k (2k-1)) for k = 1..10
constexpr std::array<double, 10> kStirling = {
    1.0 / 12.0,           -1.0 / 360.0,          1.0 / 1260.0,        -1.0 / 1680.0,
    1.0 / 1188.0,         -691.0 / 360360.0,     1.0 / 156.0,         -3617.0 / 122400.0,
    43867.0 / 244188.0,   -174611.0 / 125400.0,
};

bool is_nonpositive_integer(Complex z, double scale = 1.0) {
    const double nearest = std::round(z.real());
    if (nearest > 0.0) return false;
    return std::abs(z - Complex(nearest, 0.0)) <= 8.0 * kEps * std::max(1.0, scale);
}

Complex stirling(Complex w) {
    const Complex inv = 1.0 / w;
    const Complex inv2 = inv * inv;
    Complex series = 0.0;
    Complex power = inv;
    for (double c : kStirling) {
        series += c * power;
        power *= inv2;
    }
    return (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

template <class T>
struct SeriesResult {
    std::complex<T> value;
    double error;
    int terms;
};

// Σ_n (a)_n (b)_n z^n / (Γ(c+n) n!) starting from `first` = 1/Γ(c) (ignored when
// c is a non-positive integer, where the sum starts at n = 1-c).
template <class T>
SeriesResult<T> series_in(std::complex<T> a, std::complex<T> b, std::complex<T> c, std::complex<T> z,
                          std::complex<T> first, const Hyp2f1Options& opt) {
    using C = std::complex<T>;
    const T eps = std::numeric_limits<T>::epsilon();
    const Complex cd(double(c.real()), double(c.imag()));
    int start = 0;
    C term;
    if (is_nonpositive_integer(cd, std::abs(cd))) {
        // 1/Γ(c+n) vanishes for n < 1-c; the first surviving term has Γ(1) = 1.
        start = 1 - static_cast<int>(std::round(cd.real()));
        term = T(1);
        for (int k = 0; k < start; ++k) term *= (a + T(k)) * (b + T(k)) * z / T(k + 1);
    } else {
        term = first;
    }

    C sum = T(0);
    T abs_sum = 0;
    int quiet = 0;
    for (int n = start; n < start + opt.max_terms; ++n) {
        sum += term;
        abs_sum += std::abs(term);
        const C ratio_num = (a + T(n)) * (b + T(n)) * z;
        if (ratio_num == C(T(0))) {
            // terminating polynomial
            const T err = sum == C(T(0)) ? T(0) : 2 * eps * abs_sum / std::abs(sum);
            return {sum, double(err), n - start + 1};
        }
        const C next = term * ratio_num / ((c + T(n)) * T(n + 1));
        const bool shrinking = std::abs(next) < std::abs(term);
        if (shrinking && std::abs(next) <= T(opt.tolerance) * std::abs(sum)) {
            if (++quiet >= 2) {
                sum += next;
                const T err = (std::abs(next) + 2 * eps * abs_sum) / std::abs(sum);
                return {sum, double(err), n - start + 2};
            }
        } else {
            quiet = 0;
        }
        term = next;
    }
    const double attained = sum == C(T(0)) ? 1.0 : double(std::abs(term) / std::abs(sum));
    throw ConvergenceError("hyp2f1_regularized: series did not converge", attained);
}

// 1/Γ(c); exact products for small positive integers, ln_gamma otherwise.
template <class T>
std::complex<T> reciprocal_gamma(std::complex<T> c) {
    const Complex cd(double(c.real()), double(c.imag()));
    if (c.imag() == T(0) && c.real() == std::round(c.real()) && c.real() >= 1 && c.real() <= 170) {
        T f = 1;
        for (int k = 2; k < int(c.real()); ++k) f *= T(k);
        return T(1) / f;
    }
    if (is_nonpositive_integer(cd, std::abs(cd))) return T(0);
    const Complex r = std::exp(-ln_gamma(cd));
    return {T(r.real()), T(r.imag())};
}

template <class T>
SeriesResult<T> hyp2f1_impl(std::complex<T> a, std::complex<T> b, std::complex<T> c,
                            std::complex<T> z, const Hyp2f1Options& options) {
    using C = std::complex<T>;
    const T r = std::abs(z);
    if (!(r < T(1))) {
        throw DomainError("hyp2f1_regularized: |z| must be < 1");
    }
    // Canonical parameter order makes the result exactly symmetric in (a, b).
    if (std::pair(b.real(), b.imag()) < std::pair(a.real(), a.imag())) std::swap(a, b);
    const C first = reciprocal_gamma(c);

    auto run = [&](C aa, C bb, C zz) {
        SeriesResult<T> out = series_in<T>(aa, bb, c, zz, first, options);
        if constexpr (std::is_same_v<T, double>) {
            // Heavy cancellation between terms: redo the sum with a wider mantissa.
            if (out.error > 1e-12) {
                using W = std::complex<long double>;
                SeriesResult<long double> wide = series_in<long double>(
                    W(aa), W(bb), W(c), W(zz), W(first), options);
                if (wide.error < out.error) out = {C(wide.value), wide.error, wide.terms};
            }
        }
        return out;
    };

    if (r > T(0.5)) {
        const C w = z / (z - T(1));
        if (std::abs(w) < r) {
            SeriesResult<T> inner = run(a, c - b, w);
            inner.value *= std::pow(T(1) - z, -a);
            return inner;
        }
    }
    return run(a, b, z);
}

}  // namespace

Hyp2f1Result hyp2f1_regularized_detailed(Complex a, Complex b, Complex c, Complex z,
                                         const Hyp2f1Options& options) {
    const SeriesResult<double> r = hyp2f1_impl<double>(a, b, c, z, options);
    return {r.value, r.error, r.terms};
}

Hyp2f1ResultExt hyp2f1_regularized_extended(ComplexExt a, ComplexExt b, ComplexExt c, ComplexExt z,
                                            const Hyp2f1Options& options) {
    const SeriesResult<long double> r = hyp2f1_impl<long double>(a, b, c, z, options);
    return {r.value, r.error, r.terms};
}

Complex ln_gamma(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw DomainError("ln_gamma: non-finite argument");
    }
    if (is_nonpositive_integer(z, std::abs(z))) {
        throw PoleError("ln_gamma: argument is a pole of the Gamma function");
    }
    // Shift up to |w| >= 15 where the Stirling tail is below 1e-20, then undo
    // the shift with principal logs (this keeps the loggamma branch).
    int shift = 0;
    if (z.real() < 15.0) shift = static_cast<int>(std::ceil(15.0 - z.real()));
    Complex correction = 0.0;
    for (int k = 0; k < shift; ++k) correction += std::log(z + double(k));
    return stirling(z + double(shift)) - correction;
}

}  // namespace lgspdc
