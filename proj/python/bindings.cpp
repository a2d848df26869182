#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lgspdc/amplitude.hpp"
#include "lgspdc/engineering.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/oracle.hpp"
#include "lgspdc/state.hpp"

namespace py = pybind11;
using namespace lgspdc;

namespace {

ModeIndex mode(std::pair<int, int> m) { return {m.first, m.second}; }

PumpSpec pump_from(const std::vector<std::pair<std::pair<int, int>, Complex>>& components, double wavelength) {
    PumpSpec p;
    for (const auto& [m, a] : components) p.components.push_back({mode(m), a});
    p.wavelength = wavelength;
    return p.normalized();
}

}  // namespace

PYBIND11_MODULE(_lgspdc, m) {
    m.doc() = "Laguerre-Gaussian coincidence amplitudes of SPDC photon pairs";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<AccuracyError>(m, "AccuracyError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<InfeasibleTargetError>(m, "InfeasibleTargetError", base.ptr());
    py::register_exception<EmptySubspaceError>(m, "EmptySubspaceError", base.ptr());

    m.def("ln_gamma", &ln_gamma, py::arg("z"));
    m.def("hyp2f1_regularized", [](Complex a, Complex b, Complex c, Complex z) { return hyp2f1_regularized(a, b, c, z); },
          py::arg("a"), py::arg("b"), py::arg("c"), py::arg("z"));

    py::class_<BeamDispersion>(m, "BeamDispersion")
        .def(py::init([](double k, double ug, double gvd) { return BeamDispersion{k, ug, gvd}; }), py::arg("wavenumber"),
             py::arg("group_velocity"), py::arg("gvd") = 0.0)
        .def_readwrite("wavenumber", &BeamDispersion::wavenumber)
        .def_readwrite("group_velocity", &BeamDispersion::group_velocity)
        .def_readwrite("gvd", &BeamDispersion::gvd);

    py::class_<CrystalSpec>(m, "CrystalSpec")
        .def(py::init([](double length, BeamDispersion p, BeamDispersion s, BeamDispersion i, std::optional<double> poling) {
                 CrystalSpec c{length, p, s, i, poling};
                 c.validate();
                 return c;
             }),
             py::arg("length"), py::arg("pump"), py::arg("signal"), py::arg("idler"), py::arg("poling_period") = py::none())
        .def_readwrite("length", &CrystalSpec::length)
        .def_readwrite("pump", &CrystalSpec::pump)
        .def_readwrite("signal", &CrystalSpec::signal)
        .def_readwrite("idler", &CrystalSpec::idler)
        .def_readwrite("poling_period", &CrystalSpec::poling_period)
        .def("central_mismatch", &CrystalSpec::central_mismatch);

    py::class_<BeamGeometry>(m, "BeamGeometry")
        .def(py::init([](double wp, double ws, double wi) {
                 BeamGeometry g{wp, ws, wi};
                 g.validate();
                 return g;
             }),
             py::arg("pump_waist"), py::arg("signal_waist"), py::arg("idler_waist"))
        .def_readwrite("pump_waist", &BeamGeometry::waist_pump)
        .def_readwrite("signal_waist", &BeamGeometry::waist_signal)
        .def_readwrite("idler_waist", &BeamGeometry::waist_idler);

    m.def("delta_omega", [](double ws, double wi, const CrystalSpec& c) { return delta_omega(ws, wi, c); },
          py::arg("omega_signal"), py::arg("omega_idler"), py::arg("crystal"));
    m.def("omega_from_wavelength", &omega_from_wavelength, py::arg("wavelength"), py::arg("center_wavelength"));

    m.def(
        "coincidence_amplitude",
        [](std::pair<int, int> p, std::pair<int, int> s, std::pair<int, int> i, double omega, const BeamGeometry& g,
           const CrystalSpec& c, double tolerance) {
            AmplitudeRequest r{mode(p), mode(s), mode(i), Detunings::cw(omega), g, c, {}};
            AmplitudeOptions o;
            o.tolerance = tolerance;
            const AmplitudeResult res = coincidence_amplitude_detailed(r, o);
            return py::make_tuple(res.value, res.error_estimate);
        },
        "Closed-form amplitude and its error estimate for CW detuning omega (rad/s).", py::arg("pump"),
        py::arg("signal"), py::arg("idler"), py::arg("omega"), py::arg("geometry"), py::arg("crystal"),
        py::arg("tolerance") = 1e-8);

    m.def(
        "brute_force_amplitude",
        [](std::pair<int, int> p, std::pair<int, int> s, std::pair<int, int> i, double omega, const BeamGeometry& g,
           const CrystalSpec& c) {
            const OracleResult res = brute_force_amplitude({mode(p), mode(s), mode(i), Detunings::cw(omega), g, c, {}});
            return py::make_tuple(res.value, res.error_estimate);
        },
        py::arg("pump"), py::arg("signal"), py::arg("idler"), py::arg("omega"), py::arg("geometry"), py::arg("crystal"));

    m.def(
        "solve_permutation_pump",
        [](std::vector<int> permutation, int l_min, const BeamGeometry& g, const CrystalSpec& c) {
            const PumpSolution sol = solve_pump_coefficients(TargetMatrix::permutation(l_min, permutation), g, c);
            std::vector<std::pair<std::pair<int, int>, Complex>> out;
            for (const auto& comp : sol.pump.components) out.push_back({{comp.mode.p, comp.mode.l}, comp.coefficient});
            return py::make_tuple(out, sol.fit_residual);
        },
        "Pump components [((p, l), a)] realizing a permutation target, and the fit residual.",
        py::arg("permutation"), py::arg("l_min"), py::arg("geometry"), py::arg("crystal"));

    py::class_<BiphotonState>(m, "BiphotonState")
        .def_property_readonly("pairs",
                               [](const BiphotonState& s) {
                                   std::vector<std::tuple<int, int, int, int>> out;
                                   for (const auto& p : s.pairs) out.emplace_back(p.signal.p, p.signal.l, p.idler.p, p.idler.l);
                                   return out;
                               })
        .def_property_readonly("omegas", [](const BiphotonState& s) { return s.grid.nodes; })
        .def_property_readonly("amplitudes",
                               [](const BiphotonState& s) {
                                   Eigen::MatrixXcd a(s.pairs.size(), s.grid.size());
                                   for (std::size_t k = 0; k < s.pairs.size(); ++k)
                                       for (std::size_t j = 0; j < s.grid.size(); ++j) a(k, j) = s.amplitude(k, j);
                                   return a;
                               })
        .def("schmidt_number_center", [](const BiphotonState& s) { return schmidt_number_center(s); })
        .def("schmidt_number_full", [](const BiphotonState& s) { return schmidt_number_full(s); })
        .def("spatial_purity", [](const BiphotonState& s) { return purity(spatial_overlap_matrix(s)); })
        .def("density_matrix", [](const BiphotonState& s) { return spatial_overlap_matrix(s).entries; })
        .def(
            "schmidt_number_subspace",
            [](const BiphotonState& s, int l_min, int l_max) {
                std::vector<ModeIndex> modes;
                for (int l = l_min; l <= l_max; ++l) modes.push_back({0, l});
                return schmidt_number_subspace(s, product_subspace(modes, modes));
            },
            py::arg("l_min"), py::arg("l_max"));

    m.def(
        "build_state",
        [](const std::vector<std::pair<std::pair<int, int>, Complex>>& pump, int p_max, int l_max,
           const std::vector<double>& omegas, const std::vector<double>& weights, const BeamGeometry& g,
           const CrystalSpec& c, double pump_wavelength) {
            OmegaGrid grid{omegas, weights};
            StateOptions o;
            o.edge_check = false;
            return build_state(pump_from(pump, pump_wavelength), {p_max, l_max}, grid, g, c, o);
        },
        "Normalized CW state for pump components [((p, l), a)] on the Omega nodes with quadrature weights.",
        py::arg("pump"), py::arg("p_max"), py::arg("l_max"), py::arg("omegas") = std::vector<double>{0.0},
        py::arg("weights") = std::vector<double>{1.0}, py::arg("geometry"), py::arg("crystal"),
        py::arg("pump_wavelength") = 405e-9);
}
