#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cqr/atoms.hpp"
#include "cqr/constants.hpp"
#include "cqr/errors.hpp"
#include "cqr/graphene.hpp"
#include "cqr/lifshitz.hpp"
#include "cqr/potential_curve.hpp"
#include "cqr/sweep.hpp"
#include "cqr/wkb.hpp"

namespace py = pybind11;
using namespace cqr;

namespace {

template <class Exc>
void bind_error(py::module_& m, const char* name, PyObject* base) {
  py::register_exception<Exc>(m, name, base);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Casimir-Polder potentials above graphene in a magnetic field and quantum reflection";

  m.attr("hbar") = K::hbar;
  m.attr("c") = K::c;
  m.attr("e") = K::e;
  m.attr("eps0") = K::eps0;
  m.attr("mu0") = K::mu0;
  m.attr("au_polarizability") = K::au_polarizability;
  m.attr("constants_version") = kConstantsVersion;
  m.attr("__version__") = kToolVersion;
  m.def("nev_to_joule", &units::nev_to_joule);
  m.def("joule_to_nev", &units::joule_to_nev);
  m.def("ev_to_joule", &units::ev_to_joule);

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  PyObject* base = error.ptr();
  bind_error<DomainError>(m, "DomainError", base);
  bind_error<UnknownSpecies>(m, "UnknownSpecies", base);
  bind_error<LandauSumNotConverged>(m, "LandauSumNotConverged", base);
  bind_error<DegenerateSheetResponse>(m, "DegenerateSheetResponse", base);
  bind_error<QuadratureFailure>(m, "QuadratureFailure", base);
  bind_error<NotRetardedRegime>(m, "NotRetardedRegime", base);
  bind_error<NoBadlandsRegion>(m, "NoBadlandsRegion", base);
  bind_error<StiffOscillationFailure>(m, "StiffOscillationFailure", base);
  bind_error<UnitarityViolation>(m, "UnitarityViolation", base);
  bind_error<ShortDistanceUnresolved>(m, "ShortDistanceUnresolved", base);
  bind_error<ConvergenceFailure>(m, "ConvergenceFailure", base);
  bind_error<InvalidSpec>(m, "InvalidSpec", base);
  bind_error<IoError>(m, "IoError", base);
  bind_error<SweepAborted>(m, "SweepAborted", base);

  py::class_<AtomSpecies>(m, "AtomSpecies")
      .def(py::init<>())
      .def_static("from_table_units", &AtomSpecies::from_table_units, py::arg("name"),
                  py::arg("mass_kg"), py::arg("alpha0_au"), py::arg("xi_l_ev"))
      .def_readwrite("name", &AtomSpecies::name)
      .def_readwrite("mass", &AtomSpecies::mass)
      .def_readwrite("alpha0", &AtomSpecies::alpha0)
      .def_readwrite("xi_l", &AtomSpecies::xi_l)
      .def("validate", &AtomSpecies::validate)
      .def("__repr__", [](const AtomSpecies& a) { return "<AtomSpecies " + a.name + ">"; });
  m.def("atom_lookup", [](const std::string& name) { return atom_lookup(name); });
  m.def("atom_names", [] { return AtomTable::builtin().names(); });
  m.def("polarizability", &polarizability, py::arg("atom"), py::arg("xi"));

  py::class_<GrapheneConfig>(m, "GrapheneConfig")
      .def(py::init<>())
      .def(py::init([](double B, double mu_c_ev) { return GrapheneConfig::with_field(B, mu_c_ev); }),
           py::arg("B"), py::arg("mu_c_ev"))
      .def_readwrite("B", &GrapheneConfig::B)
      .def_readwrite("mu_c", &GrapheneConfig::mu_c)
      .def_readwrite("tau", &GrapheneConfig::tau)
      .def_readwrite("v_F", &GrapheneConfig::v_F)
      .def_readwrite("n_max", &GrapheneConfig::n_max)
      .def_readwrite("tail_tol", &GrapheneConfig::tail_tol)
      .def("validate", &GrapheneConfig::validate);

  m.def(
      "conductivities",
      [](double xi, const GrapheneConfig& cfg) {
        const auto s = conductivities(xi, cfg);
        return py::make_tuple(s.sigma_xx, s.sigma_xy);
      },
      py::arg("xi"), py::arg("cfg"), "(sigma_xx, sigma_xy) in siemens at imaginary frequency i*xi");
  m.def(
      "reflection_coefficients",
      [](double k, double xi, const GrapheneConfig& cfg) {
        const auto r = reflection_coefficients(k, xi, cfg);
        return py::make_tuple(r.r_ss, r.r_pp);
      },
      py::arg("k"), py::arg("xi"), py::arg("cfg"));

  m.def("cp_potential", &cp_potential, py::arg("z"), py::arg("atom"), py::arg("cfg"),
        py::arg("tol") = kDefaultQuadratureTol, py::call_guard<py::gil_scoped_release>());
  m.def("cp_derivatives", &cp_derivatives, py::arg("z"), py::arg("atom"), py::arg("cfg"),
        py::arg("tol") = kDefaultQuadratureTol, py::call_guard<py::gil_scoped_release>());

  py::class_<PotentialCurve, std::shared_ptr<PotentialCurve>>(m, "PotentialCurve")
      .def_property_readonly("z", &PotentialCurve::z_grid)
      .def_property_readonly("U", &PotentialCurve::U_values)
      .def_property_readonly("dU", &PotentialCurve::dU_values)
      .def_property_readonly("d2U", &PotentialCurve::d2U_values)
      .def_property_readonly("z_min", &PotentialCurve::z_min)
      .def_property_readonly("z_max", &PotentialCurve::z_max)
      .def("__call__", py::overload_cast<double>(&PotentialCurve::U, py::const_), py::arg("z"))
      .def("to_csv", [](const PotentialCurve& c) {
        std::ostringstream os;
        c.write_csv(os);
        return os.str();
      });

  m.def(
      "tabulate",
      [](const AtomSpecies& atom, const GrapheneConfig& cfg, double z_min, double z_max,
         int points_per_decade, double tol, int workers) {
        TabulationOptions o{z_min, z_max, points_per_decade, tol, workers};
        return std::make_shared<PotentialCurve>(tabulate(atom, cfg, o));
      },
      py::arg("atom"), py::arg("cfg"), py::arg("z_min") = 1e-9, py::arg("z_max") = 1e-3,
      py::arg("points_per_decade") = 48, py::arg("tol") = kDefaultQuadratureTol,
      py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("asymptotic_c4", &asymptotic_c4, py::arg("curve"));
  m.def(
      "ratio_curve",
      [](const AtomSpecies& atom, const GrapheneConfig& cfg_B, const GrapheneConfig& cfg_B0,
         const std::vector<double>& z) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : ratio_curve(atom, cfg_B, cfg_B0, z)) out.emplace_back(p.z, p.ratio);
        return out;
      },
      py::arg("atom"), py::arg("cfg_B"), py::arg("cfg_B0"), py::arg("z"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<QRSolution>(m, "QRSolution")
      .def_readonly("R", &QRSolution::reflection_probability)
      .def_readonly("c_plus", &QRSolution::c_plus_final)
      .def_readonly("c_minus", &QRSolution::c_minus_final)
      .def_readonly("z_m", &QRSolution::z_m)
      .def_readonly("z_i", &QRSolution::z_i)
      .def_readonly("z_f", &QRSolution::z_f)
      .def_readonly("converged", &QRSolution::converged)
      .def_readonly("phase_final", &QRSolution::phase_final)
      .def_readonly("flux_drift", &QRSolution::flux_drift)
      .def_readonly("warnings", &QRSolution::warnings)
      .def_property_readonly("q_profile",
                             [](const QRSolution& s) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& q : s.q_profile) out.emplace_back(q.z, q.q);
                               return out;
                             })
      .def("to_json", &QRSolution::to_json);

  m.def(
      "solve_qr",
      [](const AtomSpecies& atom, double energy_nev, std::shared_ptr<PotentialCurve> curve,
         double ode_tol, double z_floor, int workers) {
        SolveOptions o;
        o.ode_tol = ode_tol;
        o.z_floor = z_floor;
        o.workers = workers;
        return solve_qr(atom, units::nev_to_joule(energy_nev), std::move(curve), o);
      },
      py::arg("atom"), py::arg("energy_nev"), py::arg("curve"),
      py::arg("ode_tol") = kDefaultOdeTol, py::arg("z_floor") = kShortDistanceFloor,
      py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
  m.def(
      "find_q_peak",
      [](const AtomSpecies& atom, double energy_nev, std::shared_ptr<PotentialCurve> curve) {
        QRProblem p{atom, units::nev_to_joule(energy_nev), std::move(curve), 0.0, 0.0};
        return find_q_peak(p);
      },
      py::arg("atom"), py::arg("energy_nev"), py::arg("curve"));

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("swept_value", &SweepRecord::swept_value)
      .def_readonly("value", &SweepRecord::value)
      .def_readonly("z_m", &SweepRecord::z_m)
      .def_readonly("converged", &SweepRecord::converged)
      .def_readonly("note", &SweepRecord::note)
      .def("failed", &SweepRecord::failed);

  m.def(
      "run_sweep",
      [](const std::string& atom, const std::string& mode, const std::map<std::string, double>& fixed,
         double start, double stop, int points, const std::string& spacing, int workers) {
        SweepSpec s;
        s.atom = atom;
        s.mode = parse_mode(mode);
        s.fixed = fixed;
        s.range = {start, stop, points, parse_spacing(spacing)};
        s.workers = workers;
        py::gil_scoped_release release;
        return run_sweep(s);
      },
      py::arg("atom"), py::arg("mode"), py::arg("fixed"), py::arg("start"), py::arg("stop"),
      py::arg("points"), py::arg("spacing") = "log", py::arg("workers") = 1);
  m.def("landau_crossing_fields",
        [](double mu_c_ev, int n_first, int n_last) {
          return landau_crossing_fields(units::ev_to_joule(mu_c_ev), GrapheneConfig{}, n_first,
                                        n_last);
        },
        py::arg("mu_c_ev"), py::arg("n_first") = 1, py::arg("n_last") = 10);
  m.def("detect_discontinuities", [](const std::vector<SweepRecord>& records) {
    std::vector<std::tuple<double, double, double>> out;
    for (const auto& d : detect_discontinuities(records)) out.emplace_back(d.B_low, d.B_high, d.jump);
    return out;
  });
}
