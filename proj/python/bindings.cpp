#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rydkerr/cli.hpp"
#include "rydkerr/config.hpp"
#include "rydkerr/errors.hpp"
#include "rydkerr/fitting.hpp"
#include "rydkerr/interferometry.hpp"
#include "rydkerr/rdma.hpp"

namespace py = pybind11;
using namespace rydkerr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarFieldMap to_map(const Array& a, double pitch) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  ScalarFieldMap m(GridSpec{static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)), pitch});
  std::copy(a.data(), a.data() + a.size(), m.values.begin());
  return m;
}

Array to_array(const ScalarFieldMap& m) {
  Array a({m.height(), m.width()});
  std::copy(m.values.begin(), m.values.end(), a.mutable_data());
  return a;
}

Array to_array(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

// Applies f(energy, cfg) elementwise over an array of energies.
template <typename R, typename F>
py::array_t<R> over_energies(const Array& energy, const ExcitonSeriesConfig& cfg, F f) {
  py::array_t<R> out(std::vector<py::ssize_t>(energy.shape(), energy.shape() + energy.ndim()));
  for (py::ssize_t i = 0; i < energy.size(); ++i) out.mutable_data()[i] = f(energy.data()[i], cfg);
  return out;
}

BlockadeMode mode_for(const ExcitonSeriesConfig& cfg, bool blockade) {
  return blockade ? cfg.blockade : BlockadeMode{};
}

IntensityReference reference_for(const std::string& name) {
  if (name == "incident") return IntensityReference::incident;
  if (name == "crystal_average") return IntensityReference::crystal_average;
  throw py::value_error("reference must be 'incident' or 'crystal_average'");
}

}  // namespace

PYBIND11_MODULE(_rydkerr, m) {
  m.doc() = "Rydberg exciton Kerr model, fringe analysis and saturable fits.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<SignalProcessingError>(m, "SignalProcessingError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());

  py::enum_<BlockadeVariant>(m, "BlockadeVariant")
      .value("none", BlockadeVariant::none)
      .value("broadening", BlockadeVariant::broadening)
      .value("saturable", BlockadeVariant::saturable)
      .value("combined", BlockadeVariant::combined);

  py::class_<ExcitonSeriesConfig>(m, "Config")
      .def_readwrite("gap_energy", &ExcitonSeriesConfig::gap_energy)
      .def_readwrite("rydberg_energy", &ExcitonSeriesConfig::rydberg_energy)
      .def_readwrite("quantum_defect", &ExcitonSeriesConfig::quantum_defect)
      .def_readwrite("epsilon_b", &ExcitonSeriesConfig::epsilon_b)
      .def_readwrite("extra_broadening", &ExcitonSeriesConfig::extra_broadening)
      .def_readwrite("n_min", &ExcitonSeriesConfig::n_min)
      .def_readwrite("n_max", &ExcitonSeriesConfig::n_max)
      .def_readwrite("chi3_0", &ExcitonSeriesConfig::chi3_0)
      .def_readwrite("crystal_length", &ExcitonSeriesConfig::crystal_length)
      .def_property(
          "blockade", [](const ExcitonSeriesConfig& c) { return c.blockade.variant; },
          [](ExcitonSeriesConfig& c, BlockadeVariant v) { c.blockade.variant = v; })
      .def("linewidth", &ExcitonSeriesConfig::linewidth, py::arg("n"))
      .def("validate", &ExcitonSeriesConfig::validate)
      .def("to_json", [](const ExcitonSeriesConfig& c) { return config_to_json(c); });

  m.def("default_config", &default_config);
  m.def("load_config", [](const std::filesystem::path& p) { return load_config(p).config; }, py::arg("path"));
  m.def("parse_config", [](const std::string& text) { return parse_config(text).config; }, py::arg("text"));
  m.def("exciton_energy", &exciton_energy, py::arg("n"), py::arg("config"));
  m.def("oscillator_strength", &oscillator_strength, py::arg("n"), py::arg("config"));
  m.def("saturation_intensity",
        [](int n, const ExcitonSeriesConfig& c) { return c.blockade.saturation_intensity(n, c.quantum_defect); },
        py::arg("n"), py::arg("config"));

  m.def(
      "chi1",
      [](const Array& e, const ExcitonSeriesConfig& c) {
        return over_energies<complex>(e, c, [](double x, const ExcitonSeriesConfig& k) { return chi1(x, k); });
      },
      py::arg("energy"), py::arg("config"));
  m.def(
      "chi3",
      [](const Array& e, const ExcitonSeriesConfig& c) {
        return over_energies<complex>(e, c, [](double x, const ExcitonSeriesConfig& k) { return chi3(x, k); });
      },
      py::arg("energy"), py::arg("config"));
  m.def(
      "kerr_coefficient",
      [](const Array& e, const ExcitonSeriesConfig& c) { return over_energies<double>(e, c, kerr_coefficient); },
      py::arg("energy"), py::arg("config"), "Low-intensity n2 [mm^2/mW].");
  m.def(
      "linear_absorption",
      [](const Array& e, const ExcitonSeriesConfig& c) { return over_energies<double>(e, c, linear_absorption); },
      py::arg("energy"), py::arg("config"));
  m.def(
      "transmission",
      [](const Array& e, const ExcitonSeriesConfig& c) { return over_energies<double>(e, c, transmission); },
      py::arg("energy"), py::arg("config"));
  m.def(
      "phase_shift",
      [](double e, const Array& intensity, const ExcitonSeriesConfig& c, bool blockade, const std::string& ref) {
        const BlockadeMode mode = mode_for(c, blockade);
        const IntensityReference r = reference_for(ref);
        Array out(std::vector<py::ssize_t>(intensity.shape(), intensity.shape() + intensity.ndim()));
        for (py::ssize_t i = 0; i < intensity.size(); ++i)
          out.mutable_data()[i] = phase_shift(e, intensity.data()[i], c, mode, r);
        return out;
      },
      py::arg("energy"), py::arg("intensity"), py::arg("config"), py::arg("blockade") = true,
      py::arg("reference") = "incident", "Kerr phase [rad] at incident intensities [mW/mm^2].");

  m.def(
      "demodulate_phase", [](const Array& img, double radius) { return to_array(demodulate_phase(to_map(img, 1.0), radius)); },
      py::arg("interferogram"), py::arg("window_radius") = 0.0);
  m.def(
      "unwrap_phase",
      [](const Array& wrapped) {
        const auto r = unwrap_phase(to_map(wrapped, 1.0));
        return py::make_tuple(to_array(r.phase), r.residual_jumps);
      },
      py::arg("wrapped"));
  m.def(
      "extract_phase_curve",
      [](const Array& high, const Array& low, const Array& intensity, std::size_t bins, double tolerance,
         std::size_t border) {
        ExtractionOptions opt;
        opt.binning.n_bins = bins;
        opt.binning.tolerance = tolerance;
        opt.binning.border = border;
        const auto ex = extract_phase_curve(to_map(high, 1.0), to_map(low, 1.0), to_map(intensity, 1.0), opt);
        py::dict d;
        d["phase"] = to_array(ex.phase);
        d["intensity"] = to_array(ex.curve.intensities);
        d["dphi"] = to_array(ex.curve.mean_phase);
        d["std"] = to_array(ex.curve.std_phase);
        d["npix"] = ex.curve.pixel_counts;
        d["residual_jumps"] = ex.residual_jumps;
        return d;
      },
      py::arg("high"), py::arg("low"), py::arg("intensity"), py::arg("bins") = 40, py::arg("tolerance") = 0.01,
      py::arg("border") = 0);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("names", &FitResult::names)
      .def_readonly("params", &FitResult::params)
      .def_readonly("sigmas", &FitResult::sigmas)
      .def_readonly("residual_norm", &FitResult::residual_norm)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("warnings", &FitResult::warnings)
      .def("param", &FitResult::param)
      .def("sigma", &FitResult::sigma)
      .def("__repr__", [](const FitResult& f) {
        std::ostringstream s;
        s << "FitResult(";
        for (std::size_t i = 0; i < f.names.size(); ++i)
          s << (i ? ", " : "") << f.names[i] << '=' << f.params[i] << "+/-" << f.sigmas[i];
        s << ", converged=" << (f.converged ? "True" : "False") << ')';
        return s.str();
      });

  m.def(
      "fit_saturable",
      [](std::vector<double> intensity, std::vector<double> dphi, std::optional<std::vector<double>> std_phase) {
        PhaseShiftCurve c;
        c.intensities = std::move(intensity);
        c.mean_phase = std::move(dphi);
        c.std_phase = std_phase ? *std_phase : std::vector<double>(c.intensities.size(), 0.0);
        c.pixel_counts.assign(c.intensities.size(), 1);
        c.validate();
        return fit_saturable(c, std_phase ? Weighting::inverse_variance : Weighting::unweighted);
      },
      py::arg("intensity"), py::arg("dphi"), py::arg("std") = py::none());
  m.def("saturable_model", py::vectorize(&saturable_model), py::arg("intensity"), py::arg("alpha"), py::arg("isat"));
  m.def("fit_powerlaw", &fit_powerlaw, py::arg("ns"), py::arg("isats"), py::arg("delta"));
  m.def(
      "extract_n2",
      [](double alpha, double t, double length_um, double wavelength_nm) {
        const auto e = extract_n2(alpha, t, length_um, wavelength_nm);
        return py::make_tuple(e.n2, e.z0_um);
      },
      py::arg("alpha"), py::arg("transmission"), py::arg("length_um"), py::arg("wavelength_nm"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}
