#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fcarab/beamformers.hpp"
#include "fcarab/monte_carlo.hpp"
#include "fcarab/scenario.hpp"
#include "fcarab/svest.hpp"

namespace py = pybind11;
using namespace fcarab;

namespace {

NominalGeometry make_geometry(int ring1, int ring2, double r1, double r2, double carrier) {
  return NominalGeometry::at_carrier(ring1, ring2, r1, r2, carrier);
}

py::list records_to_list(const std::vector<SinrRecord>& records) {
  py::list out;
  for (const auto& r : records) {
    py::dict d;
    d["method"] = std::string(method_tag(r.method));
    d["snr_db"] = r.snr_db;
    d["mean_sinr_db"] = r.mean_sinr_db;
    d["std_sinr_db"] = r.std_sinr_db;
    d["trials"] = r.trials;
    d["failures"] = r.failures;
    d["snapshots"] = r.snapshots;
    out.append(d);
  }
  return out;
}

Scenario parse(const std::string& text) {
  Scenario sc = scenario_from_json(text);
  sc.validate();
  return sc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust beamforming for a two-ring flexible conformal array";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "steering_vector",
      [](double theta_deg, double r1, double r2, int ring1, int ring2, double r1_nominal,
         double r2_nominal, double carrier_hz) {
        const auto g = make_geometry(ring1, ring2, r1_nominal, r2_nominal, carrier_hz);
        return ComplexVector(steering_vector(g, theta_deg, r1, r2).entries);
      },
      py::arg("theta_deg"), py::arg("r1_mm"), py::arg("r2_mm"), py::arg("ring1_elements") = 9,
      py::arg("ring2_elements") = 13, py::arg("ring1_radius_mm") = 500.0,
      py::arg("ring2_radius_mm") = 1000.0, py::arg("carrier_hz") = 5e9,
      "Steering vector at (theta, r1, r2); the nominal radii fix the central angles.");

  m.def(
      "capon_weights",
      [](const ComplexMatrix& r, const ComplexVector& sv) {
        return ComplexVector(capon_weights(CovMatrix{r}, sv).w);
      },
      py::arg("covariance"), py::arg("steering"), "w = R^-1 s / (s^H R^-1 s).");

  m.def(
      "solve_p1",
      [](const ComplexVector& a_bar, const ComplexMatrix& r_check, double bound) {
        return solve_p1(a_bar, r_check, bound);
      },
      py::arg("a_bar"), py::arg("r_check"), py::arg("mismatch_bound"),
      "Orthogonal mismatch minimizing (a + e)^H R (a + e) with e^H a = 0.");

  m.def(
      "noise_power_estimate",
      [](const ComplexMatrix& r) { return noise_power_estimate(CovMatrix{r}); },
      py::arg("covariance"));

  m.def(
      "example_scenario",
      [](int example, double spacing) { return scenario_to_json(example_scenario(example, spacing)); },
      py::arg("example"), py::arg("spacing_wavelengths") = 0.5,
      "JSON text of a built-in scenario.");

  m.def(
      "validate_scenario", [](const std::string& text) { parse(text); }, py::arg("json_text"),
      "Raises ConfigError when the scenario is invalid.");

  m.def(
      "run",
      [](const std::string& text, int threads, std::optional<int> trials) {
        Scenario sc = parse(text);
        if (trials) sc.trials = *trials;
        sc.validate();
        MonteCarloResult res;
        {
          py::gil_scoped_release release;
          res = run_monte_carlo(sc, {threads});
        }
        return records_to_list(res.records);
      },
      py::arg("json_text"), py::arg("threads") = 1, py::arg("trials") = py::none(),
      "Monte-Carlo SINR sweep; one dict per (method, SNR).");

  m.def(
      "sinr_csv",
      [](const std::string& text, int threads, std::optional<int> trials) {
        Scenario sc = parse(text);
        if (trials) sc.trials = *trials;
        sc.validate();
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          write_sinr_csv(out, run_monte_carlo(sc, {threads}).records);
        }
        return out.str();
      },
      py::arg("json_text"), py::arg("threads") = 1, py::arg("trials") = py::none(),
      "Same sweep as run(), formatted as the CLI's CSV.");

  py::list methods;
  for (Method mt : all_methods()) methods.append(std::string(method_tag(mt)));
  m.attr("METHODS") = methods;
}
