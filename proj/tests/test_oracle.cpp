#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "lgspdc/amplitude.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/oracle.hpp"

using namespace lgspdc;

namespace {

AmplitudeRequest request(ModeIndex P, ModeIndex S, ModeIndex I, double omega = 0.0) {
    AmplitudeRequest r;
    r.pump_mode = P;
    r.signal_mode = S;
    r.idler_mode = I;
    r.detunings = Detunings::cw(omega);
    r.geometry = fixtures::reference_geometry();
    r.crystal = fixtures::ppktp();
    return r;
}

double relative(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("oracle agrees with the closed form") {
    const double omega = fixtures::omega_from_wavelength_offset(810e-9, 0.3e-9);
    const std::vector<std::array<ModeIndex, 3>> triplets = {
        {{{0, 0}, {0, 0}, {0, 0}}},   {{{0, 1}, {0, 1}, {0, 0}}},  {{{0, 1}, {0, 2}, {0, -1}}},
        {{{1, 0}, {0, 1}, {1, -1}}},  {{{0, -2}, {1, -1}, {0, -1}}}, {{{2, 1}, {1, 2}, {0, -1}}},
    };
    for (const auto& t : triplets) {
        for (double w : {0.0, omega}) {
            const AmplitudeRequest r = request(t[0], t[1], t[2], w);
            const Complex closed = coincidence_amplitude(r);
            const OracleResult o = brute_force_amplitude(r);
            INFO("triplet ", t[0].p, ",", t[0].l, " ", t[1].p, ",", t[1].l, " ", t[2].p, ",", t[2].l,
                 " omega ", w);
            CHECK(std::abs(closed - o.value) <= 1e-6 * std::max(std::abs(o.value), 1e-6 * o.scale));
        }
    }
}

TEST_CASE("oracle radial families agree") {
    const double omega = fixtures::omega_from_wavelength_offset(810e-9, -0.2e-9);
    for (const auto& t : std::vector<std::array<ModeIndex, 3>>{
             {{{0, 0}, {0, 0}, {0, 0}}}, {{{1, 1}, {0, 2}, {2, -1}}}, {{{0, 2}, {1, 1}, {0, 1}}}}) {
        const AmplitudeRequest r = request(t[0], t[1], t[2], omega);
        OracleOptions legendre, laguerre;
        laguerre.grid.family = QuadratureGrid::Radial::laguerre;
        laguerre.grid.radial_nodes = 128;
        const Complex a = brute_force_amplitude(r, legendre).value;
        const Complex b = brute_force_amplitude(r, laguerre).value;
        CHECK(relative(a, b) < 1e-6);
    }
}

TEST_CASE("oracle is symmetric under signal/idler exchange") {
    const double os = 3e11, oi = -3e11;
    for (const auto& t : std::vector<std::array<ModeIndex, 3>>{
             {{{0, 1}, {0, 2}, {1, -1}}}, {{{1, 0}, {2, 1}, {0, -1}}}}) {
        AmplitudeRequest r = request(t[0], t[1], t[2]);
        r.detunings = {os, oi};
        AmplitudeRequest x = r;
        x.signal_mode = t[2];
        x.idler_mode = t[1];
        x.detunings = {oi, os};
        x.geometry = r.geometry.swapped();
        x.crystal = r.crystal.swapped();
        const Complex a = brute_force_amplitude(r).value;
        const Complex b = brute_force_amplitude(x).value;
        CHECK(relative(a, b) < 1e-10);
    }
}

TEST_CASE("thin crystal reduces to the Gaussian overlap") {
    AmplitudeRequest r = request({0, 0}, {0, 0}, {0, 0});
    r.crystal = fixtures::ppktp(1e-6);
    const double wp = r.geometry.waist_pump, ws = r.geometry.waist_signal, wi = r.geometry.waist_idler;
    auto norm = [](double w) { return w / std::sqrt(2.0 * std::numbers::pi); };
    const double det = ((wp * wp + ws * ws) * (wp * wp + wi * wi) - wp * wp * wp * wp) / 16.0;
    const double expected = r.crystal.length * norm(wp) * norm(ws) * norm(wi) * std::numbers::pi *
                            std::numbers::pi / det;
    CHECK(std::abs(brute_force_amplitude(r).value - expected) < 1e-8 * expected);
    CHECK(std::abs(coincidence_amplitude(r) - expected) < 1e-8 * expected);
}

TEST_CASE("oracle returns exact zero for OAM-violating tuples") {
    const OracleResult o = brute_force_amplitude(request({0, 1}, {0, 1}, {0, 1}));
    CHECK(o.forbidden);
    CHECK(o.value == Complex(0.0));
}

TEST_CASE("oracle grid validation and refinement failure") {
    QuadratureGrid g;
    g.radial_nodes = 4;
    CHECK_THROWS_AS(g.validate(), DomainError);
    g = {};
    g.cutoff_widths = 4.0;
    CHECK_THROWS_AS(g.validate(), DomainError);

    OracleOptions coarse;
    coarse.grid.radial_nodes = 8;
    coarse.grid.angular_nodes = 8;
    coarse.max_refinements = 1;
    CHECK_THROWS_AS(brute_force_amplitude(request({0, 0}, {0, 0}, {0, 0}), coarse), AccuracyError);
}

TEST_CASE("pulsed oracle carries the pump envelope") {
    AmplitudeRequest r = request({0, 0}, {0, 1}, {0, -1});
    r.detunings = {2e11, -1e11};
    r.spectrum = SpectralModel::pulsed(1e-12);
    AmplitudeRequest cw_like = r;
    cw_like.spectrum = SpectralModel::cw();
    const Complex pulsed = brute_force_amplitude(r).value;
    CHECK_THROWS_AS(brute_force_amplitude(cw_like), DomainError);
    const Complex closed = coincidence_amplitude(r);
    CHECK(relative(pulsed, closed) < 1e-6);
}

TEST_CASE("raised pump radial order vanishes in the matched geometry") {
    AmplitudeRequest r = request({1, 0}, {0, 0}, {0, 0});
    r.geometry = fixtures::matched_geometry();
    r.crystal = fixtures::matched_crystal();
    const OracleResult o = brute_force_amplitude(r);
    CHECK(std::abs(o.value) < 1e-12 * o.scale);
    r.pump_mode = {0, 0};
    CHECK(std::abs(brute_force_amplitude(r).value) > 0.5 * o.scale);
}

TEST_CASE("continuum diagnostics") {
    const BeamGeometry g = fixtures::reference_geometry();
    const CrystalSpec c = fixtures::ppktp();
    PumpSpec pump;
    pump.components = {{{0, 0}, 1.0}};

    SUBCASE("a single frequency is spatially pure") {
        CHECK(continuum_spatial_purity(pump, g, c, OmegaGrid::single(), {48, 48}) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("central Schmidt number is stable under grid refinement") {
        const double coarse = continuum_schmidt_number(pump, g, c, OmegaGrid::single(), {72, 64});
        const double fine = continuum_schmidt_number(pump, g, c, OmegaGrid::single(), {96, 96});
        CHECK(std::abs(coarse - fine) < 1e-3 * fine);
    }

    SUBCASE("mode truncation bounds the continuum from below") {
        const double continuum = continuum_schmidt_number(pump, g, c, OmegaGrid::single(), {64, 64});
        double previous = 0.0;
        for (int p_max : {0, 1, 2}) {
            const BiphotonState s = build_state(pump, {p_max, 8}, OmegaGrid::single(), g, c);
            const double k = schmidt_number_center(s);
            CHECK(k > previous);
            CHECK(k < continuum);
            previous = k;
        }
    }

    SUBCASE("truncated purity bounds the continuum from above") {
        const OmegaGrid grid = OmegaGrid::composite(filter_omega_limit(810e-9, 1e-9), 4);
        const double continuum = continuum_spatial_purity(pump, g, c, grid, {64, 64});
        const BiphotonState s = build_state(pump, {1, 6}, grid, g, c, {.edge_check = false});
        const double truncated = purity(spatial_overlap_matrix(s));
        CHECK(continuum > 0.0);
        CHECK(continuum < truncated);
    }
}
