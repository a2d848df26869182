#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "lgspdc/errors.hpp"
#include "lgspdc/lgmodes.hpp"
#include "lgspdc/quadrature.hpp"

using namespace lgspdc;

namespace {

constexpr double kPi = std::numbers::pi;

// ∫∫ conj(a) b ρ dρ dφ on a Gauss-Legendre x trapezoid grid.
Complex inner_product(ModeIndex a, ModeIndex b, double w) {
    const double R = 16.0 / w;
    const QuadratureRule radial = gauss_legendre(160, 0.0, R);
    const int nphi = 64;
    Complex sum = 0.0;
    for (std::size_t k = 0; k < radial.size(); ++k) {
        const double rho = radial.nodes[k];
        for (int j = 0; j < nphi; ++j) {
            const double phi = 2 * kPi * j / nphi;
            sum += radial.weights[k] * rho * std::conj(lg_amplitude(rho, phi, a, w)) *
                   lg_amplitude(rho, phi, b, w);
        }
    }
    return sum * (2 * kPi / nphi);
}

}  // namespace

TEST_CASE("ModeIndex order") {
    CHECK(ModeIndex{0, 0}.order() == 0);
    CHECK(ModeIndex{1, -3}.order() == 5);
    CHECK(ModeIndex{0, 1} < ModeIndex{1, -1});
}

TEST_CASE("t_coefficient simple cases") {
    const double w = 33e-6;
    const Complex t00 = t_coefficient(0, {0, 0}, w);
    CHECK(std::abs(t00 - Complex(w / std::sqrt(2 * kPi), 0.0)) < 1e-15 * w);
    const Complex t01 = t_coefficient(0, {0, 1}, w);
    CHECK(std::abs(t01 - Complex(0.0, w * w / 2 / std::sqrt(kPi))) < 1e-14 * std::abs(t01));
    CHECK_THROWS_AS(t_coefficient(2, {1, 0}, w), DomainError);
    CHECK_THROWS_AS(t_coefficient(-1, {1, 0}, w), DomainError);
}

TEST_CASE("t_coefficient (u=1, p=2, l=-1) in extended precision") {
    const long double w = 1.7L, pi = std::numbers::pi_v<long double>;
    // sqrt(2! 3! / π) (w/√2)^4 (-1)^3 i^{-1} / (1! 2! 1!)
    const long double mag = std::sqrt(2.0L * 6.0L / pi) * std::pow(w / std::sqrt(2.0L), 4) / 2.0L;
    const Complex want(0.0, double(mag));  // -1 * (-i) = i
    const Complex got = t_coefficient(1, {2, -1}, double(w));
    CHECK(std::abs(got - want) < 1e-14 * std::abs(want));
}

TEST_CASE("lg_amplitude matches the generalized Laguerre form") {
    const double w = 2.0;
    for (ModeIndex m : {ModeIndex{0, 0}, ModeIndex{2, 3}, ModeIndex{3, -2}, ModeIndex{1, 1}}) {
        for (double rho : {0.1, 0.7, 1.9}) {
            const int al = std::abs(m.l);
            const double x = rho * rho * w * w / 2;
            const double norm = std::sqrt(std::tgamma(m.p + 1.0) / (kPi * std::tgamma(m.p + al + 1.0)));
            const Complex il = std::pow(Complex(0, 1), m.l);
            const Complex want = norm * std::pow(w / std::sqrt(2.0), al + 1) * (m.p % 2 ? -1.0 : 1.0) * il *
                                 std::pow(rho, al) * std::assoc_laguerre(m.p, al, x) * std::exp(-x / 2) *
                                 std::polar(1.0, m.l * 0.4);
            CHECK(std::abs(lg_amplitude(rho, 0.4, m, w) - want) < 1e-13 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("lg_amplitude vanishes on axis for l != 0") {
    CHECK(lg_amplitude(0.0, 0.3, {0, 1}, 1.0) == Complex(0.0));
    CHECK(lg_amplitude(0.0, 0.3, {2, -2}, 1.0) == Complex(0.0));
    CHECK(std::abs(lg_amplitude(0.0, 0.3, {0, 0}, 1.0)) > 0.0);
}

TEST_CASE("LG modes are orthonormal for p <= 3, |l| <= 3") {
    const double w = 25e-6;
    std::vector<ModeIndex> modes;
    for (int p = 0; p <= 3; ++p)
        for (int l = -3; l <= 3; ++l) modes.push_back({p, l});
    double worst = 0.0;
    for (const auto& a : modes)
        for (const auto& b : modes) {
            const Complex ip = inner_product(a, b, w);
            worst = std::max(worst, std::abs(ip - Complex(a == b ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-8);
    CHECK(std::abs(inner_product({0, 0}, {0, 0}, w) - 1.0) < 1e-10);
    CHECK(std::abs(inner_product({0, 1}, {1, 1}, w)) < 1e-8);
}

TEST_CASE("conjugate OAM has equal magnitude and pure azimuthal phase") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> r(0.0, 3.0), a(0.0, 2 * kPi);
    for (int k = 0; k < 200; ++k) {
        const ModeIndex m{int(k % 4), int(k % 7) - 3};
        const double rho = r(rng), phi1 = a(rng), phi2 = a(rng);
        const Complex plus = lg_amplitude(rho, phi1, m, 1.3);
        const Complex minus = lg_amplitude(rho, phi1, {m.p, -m.l}, 1.3);
        CHECK(std::abs(plus) == std::abs(minus));
        const Complex f1 = plus * std::polar(1.0, -m.l * phi1);
        const Complex f2 = lg_amplitude(rho, phi2, m, 1.3) * std::polar(1.0, -m.l * phi2);
        CHECK(std::abs(f1 - f2) <= 1e-13 * std::max(1e-300, std::abs(f1)) + 1e-300);
    }
}
