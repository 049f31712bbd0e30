// qrsadapt: design adapted wavelets, detect R peaks, benchmark, plot data.
//
// Exit codes (sysexits-style):
//   0  success
//   1  bench: sensitivity below threshold
//   2  design: degenerate fit
//   64 usage error
//   65 malformed input data, signal too short, peak index out of range
//   66 input file cannot be opened
//   73 output file cannot be created
//   70 anything else

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrsadapt/bench.hpp"
#include "qrsadapt/detector.hpp"
#include "qrsadapt/error.hpp"
#include "qrsadapt/signal_io.hpp"
#include "qrsadapt/wavelet_design.hpp"

using namespace qrsadapt;

namespace {

constexpr int kExitBelowThreshold = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitSoftware = 70;
constexpr int kExitCantCreate = 73;

struct CliExit {
  int code;
  std::string message;
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::DegenerateFit:
      return kExitDegenerate;
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DegreeTooHigh:
    case ErrorCode::ScaleTooSmall:
      return kExitUsage;
    case ErrorCode::IoFailure:
      return kExitNoInput;
    default:
      return kExitData;
  }
}

// Reads go through here so IoFailure maps to 66.
template <class F>
auto load(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw CliExit{exit_code_for(e), e.what()};
  }
}

// Writes: IoFailure becomes 73.
template <class F>
void store(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw CliExit{e.code() == ErrorCode::IoFailure ? kExitCantCreate : exit_code_for(e), e.what()};
  }
}

std::vector<AdaptedWavelet> load_bank(const std::vector<std::string>& files) {
  if (files.empty()) return builtin_wavelet_bank();
  std::vector<AdaptedWavelet> bank;
  for (const auto& f : files) bank.push_back(load([&] { return read_wavelet_file(f); }));
  return bank;
}

struct DetectFlags {
  std::vector<std::string> bank;
  double refractory_ms = 192.0;
  std::size_t window = 250;
  double eta = 0.4;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--bank", bank, "Wavelet files (default: the 5 builtin wavelets)");
    cmd->add_option("--refractory-ms", refractory_ms, "Absolute refractory period")
        ->capture_default_str();
    cmd->add_option("--window", window, "Phase-1 selection window in samples")
        ->capture_default_str();
    cmd->add_option("--eta", eta, "Relative threshold fraction")->capture_default_str();
  }

  DetectionConfig config() const {
    DetectionConfig cfg;
    cfg.refractory_s = refractory_ms / 1000.0;
    cfg.selection_window = window;
    cfg.threshold_fraction = eta;
    return cfg;
  }
};

std::string format_maxima(std::span<const double> maxima) {
  std::ostringstream os;
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    if (i) os << ' ';
    os << format_exact(maxima[i]);
  }
  return os.str();
}

DetectionResult detect(const EcgSignal& signal, const DetectFlags& flags,
                       std::vector<AdaptedWavelet>& bank) {
  bank = load_bank(flags.bank);
  const DetectionConfig cfg = flags.config();
  try {
    return run_two_phase(signal, bank, cfg);
  } catch (const Error& e) {
    throw CliExit{exit_code_for(e), e.what()};
  }
}

int cmd_design(const std::optional<std::string>& pattern_file, const std::optional<int>& builtin,
               int degree, int moments, const std::string& out) {
  if (pattern_file.has_value() == builtin.has_value()) {
    throw CliExit{kExitUsage, "exactly one of --pattern and --builtin is required"};
  }
  const Pattern pattern = pattern_file
                              ? load([&] { return read_pattern_file(*pattern_file); })
                              : builtin_qrs_patterns()[static_cast<std::size_t>(*builtin - 1)];

  AdaptedWavelet fitted = [&] {
    try {
      return fit_adapted_wavelet(pattern, degree, kDefaultResolution, moments);
    } catch (const Error& e) {
      throw CliExit{exit_code_for(e), e.what()};
    }
  }();
  // Builtins keep their bank names so a designed file can stand in for ADWk.
  std::string name = builtin ? "ADW" + std::to_string(*builtin) : pattern.name();
  const AdaptedWavelet wavelet(
      std::move(name),
      std::vector<double>(fitted.basis_coeffs().begin(), fitted.basis_coeffs().end()),
      std::vector<double>(fitted.sampled().begin(), fitted.sampled().end()));

  const AdmissibilityReport report = check_admissibility(wavelet);
  std::printf("wavelet %s degree=%d moments=%d t_peak=%.6f\n", wavelet.name().c_str(), degree,
              moments, wavelet.t_peak());
  std::printf("mean_abs=%.3e energy=%.12f c_g=%.9g admissible=%s\n", report.mean_abs,
              report.energy, report.c_g, report.admissible ? "yes" : "no");
  if (!report.admissible) throw CliExit{kExitDegenerate, "fitted wavelet is not admissible"};
  store([&] { write_wavelet_file(wavelet, out); });
  return 0;
}

int cmd_detect(const std::string& signal_file, const DetectFlags& flags, const std::string& out) {
  const EcgSignal signal = load([&] { return read_signal_csv(signal_file); });
  std::vector<AdaptedWavelet> bank;
  const DetectionResult result = detect(signal, flags, bank);
  store([&] { write_peaks_csv(result, out); });
  std::printf("record=%s wavelet=%s index=%zu peaks=%zu\n", result.record_id.c_str(),
              result.wavelet_name.c_str(), result.wavelet_index + 1, result.peaks.size());
  std::printf("per_wavelet_max=%s\n", format_maxima(result.per_wavelet_max).c_str());
  return 0;
}

int cmd_bench(const std::string& signal_file, const std::string& ann_file,
              const DetectFlags& flags, double tolerance_ms, double threshold,
              const std::string& report_file) {
  const EcgSignal signal = load([&] { return read_signal_csv(signal_file); });
  const AnnotationSet ann = load([&] { return read_annotations_csv(ann_file); });
  for (std::size_t r : ann.r_samples) {
    if (r >= signal.size()) {
      throw CliExit{kExitData, "annotation " + std::to_string(r) + " lies beyond the signal"};
    }
  }
  std::vector<AdaptedWavelet> bank;
  const DetectionResult result = detect(signal, flags, bank);

  BenchReport report;
  report.record_id = signal.record_id();
  report.wavelet_name = result.wavelet_name;
  report.wavelet_index = result.wavelet_index;
  report.config = flags.config();
  report.fs = signal.fs();
  report.sensitivity_threshold = threshold;
  try {
    report.match = match_peaks(result.peaks, ann, tolerance_ms / 1000.0, signal.fs());
  } catch (const Error& e) {
    throw CliExit{exit_code_for(e), e.what()};
  }
  store([&] { write_file_atomically(report_file, bench_report_json(report)); });
  std::printf("%s\n%s\n", kSummaryCsvHeader, bench_summary_csv_line(report).c_str());
  if (signal.record_id() != ann.record_id) {
    std::fprintf(stderr, "warning: signal record '%s' vs annotation record '%s'\n",
                 signal.record_id().c_str(), ann.record_id.c_str());
  }
  return report.match.sensitivity >= threshold ? 0 : kExitBelowThreshold;
}

int cmd_synth(const SynthConfig& cfg, const std::string& record, const std::string& out,
              const std::string& ann_out) {
  const SynthRecord rec = [&] {
    try {
      return synth_ecg(cfg, record);
    } catch (const Error& e) {
      throw CliExit{exit_code_for(e), e.what()};
    }
  }();
  store([&] { write_signal_csv(rec.signal, out); });
  if (!ann_out.empty()) store([&] { write_annotations_csv(rec.annotations, ann_out); });
  std::printf("record=%s samples=%zu beats=%zu\n", record.c_str(), rec.signal.size(),
              rec.annotations.r_samples.size());
  return 0;
}

int cmd_plot_data(const std::string& signal_file, const std::string& peaks_file,
                  const std::string& out) {
  const EcgSignal signal = load([&] { return read_signal_csv(signal_file); });
  const PeaksFile peaks = load([&] { return read_peaks_csv(peaks_file); });
  std::vector<char> is_peak(signal.size(), 0);
  for (const RPeak& p : peaks.peaks) {
    if (p.sample >= signal.size()) {
      throw CliExit{kExitData, "peak sample " + std::to_string(p.sample) +
                                   " is outside the signal (" + std::to_string(signal.size()) +
                                   " samples)"};
    }
    is_peak[p.sample] = 1;
  }
  std::string text = "time_s,amplitude,is_peak\n";
  const auto x = signal.samples();
  char buf[96];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.17g,%d\n", static_cast<double>(i) / signal.fs(), x[i],
                  is_peak[i]);
    text += buf;
  }
  store([&] { write_file_atomically(out, text); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern-adapted wavelet R-peak detection"};
  app.require_subcommand(1);

  // design
  std::optional<std::string> pattern_file;
  std::optional<int> builtin;
  int degree = kDefaultDegree;
  int moments = kBankVanishingMoments;
  std::string design_out;
  auto* design = app.add_subcommand("design", "Fit an admissible wavelet to a QRS pattern");
  design->add_option("--pattern", pattern_file, "Pattern file");
  design->add_option("--builtin", builtin, "Builtin pattern 1..5")->check(CLI::Range(1, 5));
  design->add_option("--degree", degree, "Legendre degree")->capture_default_str();
  design->add_option("--moments", moments, "Vanishing moments (1 = orthogonal to constants)")
      ->capture_default_str()
      ->check(CLI::Range(1, 20));
  design->add_option("--out", design_out, "Wavelet file to write")->required();

  // detect
  DetectFlags detect_flags;
  std::string detect_signal, detect_out;
  auto* detect_cmd = app.add_subcommand("detect", "Two-phase R-peak detection");
  detect_cmd->add_option("--signal", detect_signal, "Signal CSV")->required();
  detect_flags.add_to(detect_cmd);
  detect_cmd->add_option("--out", detect_out, "Peaks CSV to write")->required();

  // bench
  DetectFlags bench_flags;
  std::string bench_signal, bench_ann, bench_report;
  double tolerance_ms = kDefaultMatchTolerance * 1000.0;
  double threshold = 0.99;
  auto* bench = app.add_subcommand("bench", "Detect and score against annotations");
  bench->add_option("--signal", bench_signal, "Signal CSV")->required();
  bench->add_option("--ann", bench_ann, "Annotation CSV")->required();
  bench_flags.add_to(bench);
  bench->add_option("--tolerance-ms", tolerance_ms, "Match tolerance")->capture_default_str();
  bench->add_option("--threshold", threshold, "Minimum sensitivity for exit 0")
      ->capture_default_str();
  bench->add_option("--report", bench_report, "JSON report to write")->required();

  // synth
  SynthConfig synth_cfg;
  std::string synth_record = "synthetic", synth_out, synth_ann;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ECG with ground truth");
  synth->add_option("--out", synth_out, "Signal CSV to write")->required();
  synth->add_option("--ann-out", synth_ann, "Annotation CSV to write");
  synth->add_option("--record", synth_record, "Record id")->capture_default_str();
  synth->add_option("--fs", synth_cfg.fs)->capture_default_str();
  synth->add_option("--duration", synth_cfg.duration_s, "Seconds")->capture_default_str();
  synth->add_option("--bpm", synth_cfg.bpm)->capture_default_str();
  synth->add_option("--jitter", synth_cfg.rr_jitter, "RR jitter fraction")->capture_default_str();
  synth->add_option("--pattern-index", synth_cfg.pattern_index, "Builtin QRS pattern 1..5")
      ->capture_default_str();
  synth->add_option("--qrs-width", synth_cfg.qrs_width_s, "Seconds")->capture_default_str();
  synth->add_option("--p-amp", synth_cfg.p_amp)->capture_default_str();
  synth->add_option("--t-amp", synth_cfg.t_amp)->capture_default_str();
  synth->add_option("--snr-db", synth_cfg.noise_snr_db, "White noise SNR (omit for none)");
  synth->add_option("--baseline", synth_cfg.baseline_amp, "Wander amplitude")
      ->capture_default_str();
  synth->add_option("--baseline-freq", synth_cfg.baseline_freq_hz)->capture_default_str();
  synth->add_flag("--invert", synth_cfg.invert, "Negate the record");
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();

  // plot-data
  std::string plot_signal, plot_peaks, plot_out;
  auto* plot = app.add_subcommand("plot-data", "Merge signal and peaks for plotting");
  plot->add_option("--signal", plot_signal, "Signal CSV")->required();
  plot->add_option("--peaks", plot_peaks, "Peaks CSV")->required();
  plot->add_option("--out", plot_out, "CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*design) return cmd_design(pattern_file, builtin, degree, moments, design_out);
    if (*detect_cmd) return cmd_detect(detect_signal, detect_flags, detect_out);
    if (*bench) {
      return cmd_bench(bench_signal, bench_ann, bench_flags, tolerance_ms, threshold,
                       bench_report);
    }
    if (*synth) return cmd_synth(synth_cfg, synth_record, synth_out, synth_ann);
    if (*plot) return cmd_plot_data(plot_signal, plot_peaks, plot_out);
  } catch (const CliExit& e) {
    std::cerr << "qrsadapt: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "qrsadapt: " << e.what() << '\n';
    return kExitSoftware;
  }
  return kExitUsage;
}
