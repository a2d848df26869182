#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/state.hpp"

using namespace lgspdc;

namespace {

Complex center_amplitude(ModeIndex s, ModeIndex i) {
    AmplitudeRequest r;
    r.pump_mode = {0, s.l + i.l};
    r.signal_mode = s;
    r.idler_mode = i;
    r.geometry = fixtures::reference_geometry();
    r.crystal = fixtures::ppktp();
    return coincidence_amplitude(r);
}

// Least-squares a_l for unit targets at (s, l - s) and (l - s, s).
Complex fit(int s, int l) {
    const Complex x = center_amplitude({0, s}, {0, l - s}), y = center_amplitude({0, l - s}, {0, s});
    return (std::conj(x) + std::conj(y)) / (std::norm(x) + std::norm(y));
}

PumpSpec psi4_pump() {
    PumpSpec p;
    p.components = {{{0, 1}, fit(0, 1)}, {{0, 5}, fit(2, 5)}};
    return p.normalized();
}

PumpSpec psi4_prime_pump() {
    PumpSpec p;
    for (int k = 0; k < 4; ++k) p.components.push_back({{0, 2 * k}, 1.0 / center_amplitude({0, k}, {0, k})});
    return p.normalized();
}

std::vector<ModePair> s4() {
    std::vector<ModeIndex> m = {{0, 0}, {0, 1}, {0, 2}, {0, 3}};
    return product_subspace(m, m);
}

OmegaGrid reference_grid(int nodes = 201) { return OmegaGrid::wavelength_span(810e-9, 10e-9, nodes); }

StateOptions no_edge_check() {
    StateOptions o;
    o.edge_check = false;
    return o;
}

// Hand-made state with given pair spectra on a small grid.
BiphotonState synthetic(std::vector<ModePair> pairs, std::vector<std::vector<Complex>> spectra) {
    BiphotonState s;
    s.grid = OmegaGrid::gauss_legendre(static_cast<int>(spectra[0].size()), 1e12);
    s.pairs = pairs;
    for (auto& sp : spectra) {
        s.center.push_back(sp[sp.size() / 2]);
        for (auto c : sp) s.amplitudes.push_back(c);
    }
    s.signal_modes.clear();
    for (auto& p : pairs) {
        s.signal_modes.push_back(p.signal);
        s.idler_modes.push_back(p.idler);
    }
    std::sort(s.signal_modes.begin(), s.signal_modes.end());
    std::sort(s.idler_modes.begin(), s.idler_modes.end());
    const double f = 1.0 / std::sqrt(s.total_weight());
    for (auto& c : s.amplitudes) c *= f;
    for (auto& c : s.center) c *= f;
    return s;
}

}  // namespace

TEST_CASE("wavelength and detuning conversion is exact") {
    const double w = omega_from_wavelength(809e-9, 810e-9);
    CHECK(w == doctest::Approx(2.0 * std::numbers::pi * kSpeedOfLight * (1 / 809e-9 - 1 / 810e-9)).epsilon(1e-15));
    CHECK(wavelength_from_omega(w, 810e-9) == doctest::Approx(809e-9).epsilon(1e-14));
    const OmegaGrid g = reference_grid();
    CHECK(g.size() == 201);
    double sum = 0.0;
    for (double w : g.weights) sum += w;
    CHECK(sum == doctest::Approx(2.0 * omega_from_wavelength(800e-9, 810e-9)).epsilon(1e-12));
    const OmegaGrid f = OmegaGrid::filter_window(810e-9, 1e-9, 16);
    CHECK(wavelength_from_omega(f.nodes.front(), 810e-9) < 810.5e-9);
    CHECK(wavelength_from_omega(-f.nodes.front(), 810e-9) > 809.5e-9);
}

TEST_CASE("single mode pair at a single frequency") {
    PumpSpec p;
    p.components = {{{0, 0}, 1.0}};
    const BiphotonState s = build_state(p, {0, 0}, OmegaGrid::single(), fixtures::reference_geometry(),
                                        fixtures::ppktp());
    REQUIRE(s.pairs.size() == 1);
    CHECK(std::abs(s.amplitude(0, 0) - Complex(1.0)) < 1e-15);
    const SpatialDensityMatrix dm = spatial_overlap_matrix(s);
    CHECK(dm.entries.rows() == 1);
    CHECK(std::abs(dm.entries(0, 0) - Complex(1.0)) < 1e-15);
    CHECK(purity(dm) == doctest::Approx(1.0));
    CHECK(schmidt_number_full(s) == doctest::Approx(1.0));
    CHECK(schmidt_number_center(s) == doctest::Approx(1.0));
    CHECK(schmidt_number_subspace(s, s.pairs) == doctest::Approx(1.0));
}

TEST_CASE("state tensor is zero off the OAM blocks and normalized") {
    const BiphotonState s = build_state(psi4_pump(), {1, 6}, reference_grid(101),
                                        fixtures::reference_geometry(), fixtures::ppktp(), no_edge_check());
    CHECK(s.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& p : s.pairs) CHECK((p.signal.l + p.idler.l == 1 || p.signal.l + p.idler.l == 5));
    CHECK(s.at({{0, 0}, {0, 0}}, 50) == Complex(0.0));
    CHECK(s.at({{1, 2}, {0, 2}}, 3) == Complex(0.0));
    const DensityMatrixCheck check = check_density_matrix(spatial_overlap_matrix(s).entries);
    CHECK(check.ok());
}

TEST_CASE("psi4 pump gives equal amplitudes on the target pairs") {
    const BiphotonState s = build_state(psi4_pump(), {0, 8}, OmegaGrid::single(),
                                        fixtures::reference_geometry(), fixtures::ppktp());
    const BiphotonState sub = project(s, s4());
    // Renormalize the Ω = 0 column within the subspace.
    double total = 0.0;
    for (auto c : sub.center) total += std::norm(c);
    int big = 0;
    for (std::size_t a = 0; a < sub.pairs.size(); ++a) {
        const double m = std::abs(sub.center[a]) / std::sqrt(total);
        if (m < 0.1) continue;
        ++big;
        CHECK(std::abs(m - 0.5) < 0.01 * 0.5);
    }
    CHECK(big == 4);
}

TEST_CASE("psi4 and psi4' subspace Schmidt numbers") {
    const BiphotonState a = build_state(psi4_pump(), {0, 8}, OmegaGrid::single(),
                                        fixtures::reference_geometry(), fixtures::ppktp());
    CHECK(schmidt_number_subspace(a, s4()) == doctest::Approx(4.0).epsilon(0.05 / 4.0));
    const BiphotonState b = build_state(psi4_prime_pump(), {0, 8}, OmegaGrid::single(),
                                        fixtures::reference_geometry(), fixtures::ppktp());
    CHECK(schmidt_number_subspace(b, s4()) == doctest::Approx(2.04).epsilon(0.05 / 2.04));
}

TEST_CASE("psi4 subspace is spatially pure") {
    const BiphotonState s = build_state(psi4_pump(), {0, 4}, reference_grid(), fixtures::reference_geometry(),
                                        fixtures::ppktp(), no_edge_check());
    const BiphotonState sub = project(s, s4());
    CHECK(purity(spatial_overlap_matrix(sub)) == doctest::Approx(1.0).epsilon(1e-3));
    SchmidtOptions traced;
    traced.spectrally_traced = true;
    CHECK(schmidt_number_subspace(s, s4(), traced) == doctest::Approx(4.0).epsilon(0.05 / 4.0));
}

TEST_CASE("grid edge support") {
    PumpSpec p;
    p.components = {{{0, 0}, 1.0}};
    CHECK_THROWS_AS(build_state(p, {0, 1}, OmegaGrid::wavelength_span(810e-9, 0.3e-9, 41),
                                fixtures::reference_geometry(), fixtures::ppktp()),
                    GridError);
    // The sinc² tail beyond the edge carries roughly 1/(π X) of the norm, X = Δ_Ω L/2 at the edge.
    const auto geometry = fixtures::reference_geometry();
    const auto crystal = fixtures::ppktp();
    const BiphotonState narrow = build_state(p, {0, 1}, reference_grid(201), geometry, crystal, no_edge_check());
    const BiphotonState wide = build_state(p, {0, 1}, OmegaGrid::wavelength_span(810e-9, 20e-9, 401), geometry,
                                           crystal, no_edge_check());
    const double change = std::abs(narrow.norm * narrow.norm / (wide.norm * wide.norm) - 1.0);
    const double edge = 0.5 * crystal.length *
                        std::abs(delta_omega(Detunings::cw(reference_grid().nodes.back()), crystal));
    CHECK(change < 1.0 / (std::numbers::pi * edge));
    MESSAGE("norm change on doubling the span: " << change);
}

TEST_CASE("overlap matrix of proportional spectra is rank one") {
    const std::vector<Complex> f = {0.1, 0.5, Complex(0.9, 0.1), 0.4, 0.05};
    std::vector<Complex> g;
    for (auto c : f) g.push_back(Complex(0.3, -0.7) * c);
    const BiphotonState s = synthetic({{{0, 0}, {0, 1}}, {{0, 1}, {0, 0}}}, {f, g});
    const SpatialDensityMatrix dm = spatial_overlap_matrix(s);
    CHECK(std::abs(dm.entries(0, 1)) == doctest::Approx(std::sqrt((dm.entries(0, 0) * dm.entries(1, 1)).real())));
    CHECK(purity(dm) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("purity bounds") {
    for (int n : {1, 2, 5, 9}) {
        CHECK(purity(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(n, n) / n)) == doctest::Approx(1.0 / n));
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(6);
    v.normalize();
    CHECK(purity(Eigen::MatrixXcd(v * v.adjoint())) == doctest::Approx(1.0));
}

TEST_CASE("random states give valid density matrices") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ModePair> pairs;
        std::vector<std::vector<Complex>> spectra;
        for (int a = 0; a < 6; ++a) {
            pairs.push_back({{0, a}, {0, 1 - a}});
            std::vector<Complex> sp;
            for (int k = 0; k < 9; ++k) sp.emplace_back(n01(rng), n01(rng));
            spectra.push_back(sp);
        }
        const SpatialDensityMatrix dm = spatial_overlap_matrix(synthetic(pairs, spectra));
        const DensityMatrixCheck c = check_density_matrix(dm.entries);
        CHECK(c.ok());
        const double pur = purity(dm);
        CHECK(pur > 1.0 / 6 - 1e-12);
        CHECK(pur <= 1.0 + 1e-12);
    }
}

TEST_CASE("Schmidt number bounds on random subspaces") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ModePair> pairs;
        std::vector<std::vector<Complex>> spectra;
        for (int s = 0; s < 3; ++s) {
            for (int i = 0; i < 4; ++i) {
                pairs.push_back({{s, 0}, {i, 0}});
                spectra.push_back({Complex(n01(rng), n01(rng)), Complex(n01(rng), n01(rng)),
                                   Complex(n01(rng), n01(rng))});
            }
        }
        const BiphotonState st = synthetic(pairs, spectra);
        const double k = schmidt_number_subspace(st, pairs);
        CHECK(k >= 1.0 - 1e-12);
        CHECK(k <= 3.0 + 1e-12);
    }
    CHECK_THROWS_AS(schmidt_number_subspace(synthetic({{{0, 0}, {0, 0}}}, {{1.0, 1.0, 1.0}}), {}),
                    EmptySubspaceError);
    const std::vector<ModePair> elsewhere = {{{0, 5}, {0, 5}}};
    CHECK_THROWS_AS(schmidt_number_subspace(synthetic({{{0, 0}, {0, 0}}}, {{1.0, 1.0, 1.0}}), elsewhere),
                    EmptySubspaceError);
}

TEST_CASE("spectral filters") {
    const BiphotonState s = build_state(psi4_pump(), {0, 4}, reference_grid(101), fixtures::reference_geometry(),
                                        fixtures::ppktp(), no_edge_check());
    SUBCASE("a filter wider than the grid is the identity") {
        const BiphotonState f = apply_spectral_filter(s, 100e-9);
        CHECK(f.amplitudes == s.amplitudes);
        CHECK(purity(spatial_overlap_matrix(f)) == purity(spatial_overlap_matrix(s)));
        CHECK(schmidt_number_full(f) == schmidt_number_full(s));
    }
    SUBCASE("a filter passing only Ω = 0 leaves a pure state") {
        const BiphotonState f = apply_spectral_filter(s, 1e-15);
        CHECK(purity(spatial_overlap_matrix(f)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.total_weight() == doctest::Approx(1.0));
    }
    SUBCASE("a filter passing no node is degenerate") {
        const BiphotonState even = build_state(psi4_pump(), {0, 2}, reference_grid(100),
                                               fixtures::reference_geometry(), fixtures::ppktp(), no_edge_check());
        CHECK_THROWS_AS(apply_spectral_filter(even, 1e-15), DegenerateFilterError);
        CHECK_THROWS_AS(apply_spectral_filter(even, 0.0), DomainError);
    }
    SUBCASE("gaussian filter") {
        CHECK(filter_transmission(810.5e-9, 810e-9, 1e-9, FilterShape::gaussian) == doctest::Approx(0.5));
        const BiphotonState f = apply_spectral_filter(s, 1e-9, FilterShape::gaussian);
        CHECK(f.total_weight() == doctest::Approx(1.0));
        CHECK(purity(spatial_overlap_matrix(f)) > purity(spatial_overlap_matrix(s)));
    }
}

TEST_CASE("purity is non-increasing in the filter bandwidth") {
    const std::vector<double> bandwidths = {0.1e-9, 0.25e-9, 0.5e-9, 1e-9, 2e-9, 4e-9, 8e-9};
    const auto sweep = purity_sweep(psi4_pump(), {0, 4}, fixtures::reference_geometry(), fixtures::ppktp(),
                                    bandwidths, FilterShape::rectangular);
    REQUIRE(sweep.size() == bandwidths.size());
    for (std::size_t k = 1; k < sweep.size(); ++k) CHECK(sweep[k].purity <= sweep[k - 1].purity + 1e-9);
    // Same number as an explicit state on the window.
    const double edge = -omega_from_wavelength(810.5e-9, 810e-9);
    const BiphotonState s = build_state(psi4_pump(), {0, 4}, OmegaGrid::composite(edge, 4),
                                        fixtures::reference_geometry(), fixtures::ppktp(), no_edge_check());
    CHECK(purity(spatial_overlap_matrix(s)) == doctest::Approx(sweep[3].purity).epsilon(1e-12));
    const auto gauss = purity_sweep(psi4_pump(), {0, 2}, fixtures::reference_geometry(), fixtures::ppktp(),
                                    bandwidths, FilterShape::gaussian);
    for (std::size_t k = 1; k < gauss.size(); ++k) CHECK(gauss[k].purity <= gauss[k - 1].purity + 1e-9);
}

TEST_CASE("modes sharing one relative mode number have a pure spatial state") {
    auto crystal = fixtures::matched_crystal();
    PumpSpec p;
    p.components = {{{0, 2}, 1.0}};
    p.wavelength = 2.0 * std::numbers::pi * 1.8 / crystal.pump.wavenumber;
    const BiphotonState s = build_state(p, {0, 2}, OmegaGrid::gauss_legendre(64, 3e12), fixtures::matched_geometry(),
                                        crystal, no_edge_check());
    const std::vector<ModePair> positive = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 1}}, {{0, 2}, {0, 0}}};
    const BiphotonState sub = project(s, positive);
    for (double bw : {0.2e-9, 1e-9, 1e3}) {
        const BiphotonState f = apply_spectral_filter(sub, bw);
        CHECK(purity(spatial_overlap_matrix(f)) == doctest::Approx(1.0).epsilon(1e-6));
    }
    // An l = 0 pump mixes N_R = 0 with strong N_R = -2 pairs such as (0,1)(0,-1).
    p.components = {{{0, 0}, 1.0}};
    const BiphotonState mixed = build_state(p, {0, 2}, OmegaGrid::gauss_legendre(64, 3e12),
                                            fixtures::matched_geometry(), crystal, no_edge_check());
    const double pur = purity(spatial_overlap_matrix(mixed));
    MESSAGE("purity with N_R = 0 and -2 pairs: " << pur);
    CHECK(pur < 1.0 - 1e-3);
}

TEST_CASE("full Schmidt number of a separable spectrum") {
    // One mode pair: K is the number of effectively populated Ω nodes.
    const std::vector<Complex> flat(8, 1.0);
    BiphotonState s = synthetic({{{0, 0}, {0, 0}}}, {flat});
    double sw = 0, sw2 = 0;
    for (double w : s.grid.weights) {
        sw += w;
        sw2 += w * w;
    }
    CHECK(schmidt_number_full(s) == doctest::Approx(sw * sw / sw2));
}

TEST_CASE("state dumps round-trip") {
    const BiphotonState s = build_state(psi4_pump(), {1, 2}, reference_grid(11), fixtures::reference_geometry(),
                                        fixtures::ppktp(), no_edge_check());
    std::stringstream bin;
    write_state_binary(bin, s);
    const BiphotonState r = read_state_binary(bin);
    CHECK(r.pairs == s.pairs);
    CHECK(r.amplitudes == s.amplitudes);
    CHECK(r.center == s.center);
    CHECK(r.grid.nodes == s.grid.nodes);
    std::stringstream bad("LGSPDCXX");
    CHECK_THROWS_AS(read_state_binary(bad), DomainError);

    std::ostringstream csv;
    write_state_csv(csv, s);
    const std::string text = csv.str();
    CHECK(text.rfind("p_s,l_s,p_i,l_i,omega,re,im\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == 1 + s.pairs.size() * 11);
}
