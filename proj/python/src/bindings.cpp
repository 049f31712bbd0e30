#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <string>
#include <vector>

#include "qrsadapt/bench.hpp"
#include "qrsadapt/cwt.hpp"
#include "qrsadapt/detector.hpp"
#include "qrsadapt/error.hpp"
#include "qrsadapt/signal_io.hpp"
#include "qrsadapt/wavelet_design.hpp"

namespace py = pybind11;
using namespace qrsadapt;

namespace {

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

py::array_t<double> to_array(std::span<const double> s) {
  py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
  std::copy(s.begin(), s.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pattern-adapted wavelet design, CWT and two-phase R-peak detection";

  m.attr("QrsAdaptError") = py::reinterpret_steal<py::object>(
      PyErr_NewException("qrsadapt._core.QrsAdaptError", PyExc_RuntimeError, nullptr));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // attach code / line so callers can branch on them
      const py::object type = py::module_::import("qrsadapt._core").attr("QrsAdaptError");
      py::object exc = type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("line") = e.line() ? py::cast(*e.line()) : py::none();
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  m.attr("DEFAULT_DEGREE") = kDefaultDegree;
  m.attr("DEFAULT_RESOLUTION") = kDefaultResolution;
  m.attr("BANK_VANISHING_MOMENTS") = kBankVanishingMoments;

  // -- wavelet design
  py::class_<Pattern>(m, "Pattern")
      .def(py::init<std::string, std::vector<double>>(), py::arg("name"), py::arg("samples"))
      .def_property_readonly("name", &Pattern::name)
      .def_property_readonly("samples", [](const Pattern& p) { return to_array(p.samples()); })
      .def("__len__", &Pattern::size)
      .def("__repr__", [](const Pattern& p) {
        return "<Pattern '" + p.name() + "' n=" + std::to_string(p.size()) + ">";
      });

  py::class_<LegendreFit>(m, "LegendreFit")
      .def_readonly("coeffs", &LegendreFit::coeffs)
      .def_readonly("residual", &LegendreFit::residual);

  py::class_<AdaptedWavelet>(m, "AdaptedWavelet")
      .def(py::init<std::string, std::vector<double>, std::vector<double>>(), py::arg("name"),
           py::arg("basis_coeffs"), py::arg("sampled"))
      .def_property_readonly("name", &AdaptedWavelet::name)
      .def_property_readonly("degree", &AdaptedWavelet::degree)
      .def_property_readonly("basis_coeffs", [](const AdaptedWavelet& w) { return to_vec(w.basis_coeffs()); })
      .def_property_readonly("sampled", [](const AdaptedWavelet& w) { return to_array(w.sampled()); })
      .def_property_readonly("resolution", &AdaptedWavelet::resolution)
      .def_property_readonly("t_peak", &AdaptedWavelet::t_peak)
      .def_property_readonly("energy", &AdaptedWavelet::energy)
      .def("__call__", &AdaptedWavelet::operator(), py::arg("t"))
      .def("__repr__", [](const AdaptedWavelet& w) {
        return "<AdaptedWavelet '" + w.name() + "' degree=" + std::to_string(w.degree()) + ">";
      });

  py::class_<AdmissibilityReport>(m, "AdmissibilityReport")
      .def_readonly("mean_abs", &AdmissibilityReport::mean_abs)
      .def_readonly("energy", &AdmissibilityReport::energy)
      .def_readonly("c_g", &AdmissibilityReport::c_g)
      .def_readonly("admissible", &AdmissibilityReport::admissible);

  m.def("shifted_legendre", &shifted_legendre, py::arg("k"), py::arg("t"));
  m.def("resample_linear",
        [](const std::vector<double>& s, std::size_t n) { return resample_linear(s, n); },
        py::arg("samples"), py::arg("n_out"));
  m.def("fit_zero_mean_legendre", &fit_zero_mean_legendre, py::arg("pattern"),
        py::arg("degree"), py::arg("vanishing_moments") = 1);
  m.def("fit_adapted_wavelet", &fit_adapted_wavelet, py::arg("pattern"),
        py::arg("degree") = kDefaultDegree, py::arg("resolution") = kDefaultResolution,
        py::arg("vanishing_moments") = 1);
  m.def("check_admissibility", py::overload_cast<const AdaptedWavelet&>(&check_admissibility),
        py::arg("wavelet"));
  m.def("builtin_qrs_patterns", &builtin_qrs_patterns);
  m.def("builtin_wavelet_bank", &builtin_wavelet_bank, py::arg("degree") = kDefaultDegree,
        py::arg("vanishing_moments") = kBankVanishingMoments);

  // -- CWT
  py::class_<EcgSignal>(m, "EcgSignal")
      .def(py::init<std::vector<double>, double, std::string>(), py::arg("samples"), py::arg("fs"),
           py::arg("record_id") = "")
      .def_property_readonly("samples", [](const EcgSignal& s) { return to_array(s.samples()); })
      .def_property_readonly("fs", &EcgSignal::fs)
      .def_property_readonly("record_id", &EcgSignal::record_id)
      .def("__len__", &EcgSignal::size)
      .def("prefix", &EcgSignal::prefix, py::arg("n"));

  py::class_<ScaleGrid>(m, "ScaleGrid")
      .def(py::init<std::vector<double>>(), py::arg("scales"))
      .def_static("log_spaced", &ScaleGrid::log_spaced, py::arg("lo"), py::arg("hi"), py::arg("n"))
      .def_static("default_grid", &ScaleGrid::default_grid)
      .def_property_readonly("scales", [](const ScaleGrid& g) { return to_vec(g.scales()); })
      .def("__len__", &ScaleGrid::size)
      .def("validate_for", &ScaleGrid::validate_for, py::arg("fs"));

  py::class_<CoefficientPeak>(m, "CoefficientPeak")
      .def_readonly("sample_b", &CoefficientPeak::sample_b)
      .def_readonly("scale_index", &CoefficientPeak::scale_index)
      .def_readonly("scale", &CoefficientPeak::scale)
      .def_readonly("value", &CoefficientPeak::value)
      .def_readonly("magnitude", &CoefficientPeak::magnitude);

  m.def("kernel_length", &kernel_length, py::arg("scale"), py::arg("fs"));
  m.def(
      "cwt",
      [](const EcgSignal& signal, const AdaptedWavelet& wavelet, const ScaleGrid& grid, unsigned threads) {
        CwtMatrix mat = [&] {
          py::gil_scoped_release nogil;
          return cwt(signal, wavelet, grid, threads);
        }();
        py::array_t<double> out({static_cast<py::ssize_t>(mat.rows()), static_cast<py::ssize_t>(mat.columns())});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t r = 0; r < mat.rows(); ++r) {
          for (std::size_t c = 0; c < mat.columns(); ++c) {
            view(static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(c)) = mat.at(r, c);
          }
        }
        return out;
      },
      py::arg("signal"), py::arg("wavelet"), py::arg("grid") = ScaleGrid::default_grid(),
      py::arg("threads") = 0u, "Rows are scales, columns are shifts b (samples).");

  // -- detection
  py::class_<DetectionConfig>(m, "DetectionConfig")
      .def(py::init<>())
      .def_readwrite("selection_window", &DetectionConfig::selection_window)
      .def_readwrite("refractory_s", &DetectionConfig::refractory_s)
      .def_readwrite("threshold_fraction", &DetectionConfig::threshold_fraction)
      .def_readwrite("segment_length_s", &DetectionConfig::segment_length_s)
      .def_readwrite("scale_grid", &DetectionConfig::scale_grid)
      .def_readwrite("threads", &DetectionConfig::threads)
      .def("validate", &DetectionConfig::validate, py::arg("fs"))
      .def("refractory_samples", &DetectionConfig::refractory_samples, py::arg("fs"));

  py::class_<RPeak>(m, "RPeak")
      .def_readonly("sample", &RPeak::sample)
      .def_readonly("time_s", &RPeak::time_s)
      .def_readonly("scale", &RPeak::scale)
      .def_readonly("magnitude", &RPeak::magnitude)
      .def_readonly("polarity", &RPeak::polarity)
      .def("__repr__", [](const RPeak& p) { return "<RPeak sample=" + std::to_string(p.sample) + ">"; });

  py::class_<WaveletSelection>(m, "WaveletSelection")
      .def_readonly("index", &WaveletSelection::index)
      .def_readonly("per_wavelet_max", &WaveletSelection::per_wavelet_max);

  py::class_<DetectionResult>(m, "DetectionResult")
      .def_readonly("record_id", &DetectionResult::record_id)
      .def_readonly("peaks", &DetectionResult::peaks)
      .def_readonly("wavelet_name", &DetectionResult::wavelet_name)
      .def_readonly("wavelet_index", &DetectionResult::wavelet_index)
      .def_readonly("per_wavelet_max", &DetectionResult::per_wavelet_max)
      .def_property_readonly("samples", [](const DetectionResult& r) {
        std::vector<std::size_t> s;
        for (const auto& p : r.peaks) s.push_back(p.sample);
        return s;
      });

  m.def(
      "select_wavelet",
      [](const EcgSignal& s, const std::vector<AdaptedWavelet>& bank, const DetectionConfig& cfg) {
        return select_wavelet(s, bank, cfg);
      },
      py::arg("signal"), py::arg("bank"), py::arg("config") = DetectionConfig{});
  m.def("detect_r_peaks", &detect_r_peaks, py::arg("signal"), py::arg("wavelet"),
        py::arg("config") = DetectionConfig{}, py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_two_phase",
      [](const EcgSignal& s, const std::vector<AdaptedWavelet>& bank, const DetectionConfig& cfg) {
        py::gil_scoped_release nogil;
        return run_two_phase(s, bank, cfg);
      },
      py::arg("signal"), py::arg("bank"), py::arg("config") = DetectionConfig{});

  // -- bench
  py::class_<AnnotationSet>(m, "AnnotationSet")
      .def(py::init([](std::string id, std::vector<std::size_t> r) { return AnnotationSet{std::move(id), std::move(r)}; }),
           py::arg("record_id"), py::arg("r_samples"))
      .def_readonly("record_id", &AnnotationSet::record_id)
      .def_readonly("r_samples", &AnnotationSet::r_samples);

  py::class_<MatchReport>(m, "MatchReport")
      .def_readonly("tp", &MatchReport::tp)
      .def_readonly("fp", &MatchReport::fp)
      .def_readonly("fn", &MatchReport::fn)
      .def_readonly("sensitivity", &MatchReport::sensitivity)
      .def_readonly("ppv", &MatchReport::ppv)
      .def_readonly("tolerance_s", &MatchReport::tolerance_s)
      .def_readonly("mean_abs_error_s", &MatchReport::mean_abs_error_s)
      .def_readonly("no_detections", &MatchReport::no_detections)
      .def_readonly("no_reference", &MatchReport::no_reference);

  m.def(
      "match_peaks",
      [](const std::vector<RPeak>& det, const AnnotationSet& ref, double tol, double fs) {
        return match_peaks(det, ref, tol, fs);
      },
      py::arg("detected"), py::arg("reference"), py::arg("tolerance_s") = kDefaultMatchTolerance,
      py::arg("fs"));

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("fs", &SynthConfig::fs)
      .def_readwrite("duration_s", &SynthConfig::duration_s)
      .def_readwrite("bpm", &SynthConfig::bpm)
      .def_readwrite("rr_jitter", &SynthConfig::rr_jitter)
      .def_readwrite("pattern_index", &SynthConfig::pattern_index)
      .def_readwrite("qrs_width_s", &SynthConfig::qrs_width_s)
      .def_readwrite("p_amp", &SynthConfig::p_amp)
      .def_readwrite("t_amp", &SynthConfig::t_amp)
      .def_readwrite("noise_snr_db", &SynthConfig::noise_snr_db)
      .def_readwrite("baseline_amp", &SynthConfig::baseline_amp)
      .def_readwrite("baseline_freq_hz", &SynthConfig::baseline_freq_hz)
      .def_readwrite("invert", &SynthConfig::invert)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<SynthRecord>(m, "SynthRecord")
      .def_readonly("signal", &SynthRecord::signal)
      .def_readonly("annotations", &SynthRecord::annotations);

  m.def("synth_ecg", py::overload_cast<const SynthConfig&, std::string>(&synth_ecg),
        py::arg("config") = SynthConfig{}, py::arg("record_id") = "synthetic");
  m.def("synth_ecg_with_pattern",
        py::overload_cast<const SynthConfig&, const Pattern&, std::string>(&synth_ecg),
        py::arg("config"), py::arg("pattern"), py::arg("record_id") = "synthetic");

  // -- file I/O
  m.def("read_signal_csv", &read_signal_csv, py::arg("path"));
  m.def("write_signal_csv", &write_signal_csv, py::arg("signal"), py::arg("path"));
  m.def("read_annotations_csv", &read_annotations_csv, py::arg("path"));
  m.def("write_annotations_csv", &write_annotations_csv, py::arg("annotations"), py::arg("path"));
  m.def("write_peaks_csv", &write_peaks_csv, py::arg("result"), py::arg("path"));
  m.def("read_pattern_file", &read_pattern_file, py::arg("path"));
  m.def("write_pattern_file", &write_pattern_file, py::arg("pattern"), py::arg("path"));
  m.def("read_wavelet_file", &read_wavelet_file, py::arg("path"));
  m.def("write_wavelet_file", &write_wavelet_file, py::arg("wavelet"), py::arg("path"));
}
