#include "qrsadapt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "qrsadapt/error.hpp"
#include "qrsadapt/wavelet_design.hpp"

namespace qrsadapt {

MatchReport match_peaks(std::span<const RPeak> detected, const AnnotationSet& reference,
                        double tolerance_s, double fs) {
  if (!(tolerance_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!(fs > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");

  std::vector<std::size_t> order(detected.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    return detected[lhs].sample < detected[rhs].sample;
  });

  const auto& ref = reference.r_samples;
  std::vector<bool> used(ref.size(), false);
  MatchReport report;
  report.tolerance_s = tolerance_s;
  double error_sum = 0.0;

  for (std::size_t i : order) {
    const auto sample = static_cast<double>(detected[i].sample);
    // Candidates lie in [sample - tol, sample + tol]; scan outward from the
    // insertion point.
    const auto pos = std::lower_bound(ref.begin(), ref.end(), detected[i].sample) - ref.begin();
    std::ptrdiff_t best = -1;
    double best_err = 0.0;
    auto consider = [&](std::ptrdiff_t j) {
      if (used[static_cast<std::size_t>(j)]) return;
      const double err = std::abs(static_cast<double>(ref[static_cast<std::size_t>(j)]) - sample) / fs;
      if (err > tolerance_s) return;
      if (best < 0 || err < best_err) {
        best = j;
        best_err = err;
      }
    };
    for (std::ptrdiff_t j = pos - 1; j >= 0; --j) {
      if ((sample - static_cast<double>(ref[static_cast<std::size_t>(j)])) / fs > tolerance_s) break;
      consider(j);
    }
    for (auto j = pos; j < static_cast<std::ptrdiff_t>(ref.size()); ++j) {
      if ((static_cast<double>(ref[static_cast<std::size_t>(j)]) - sample) / fs > tolerance_s) break;
      consider(j);
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      ++report.tp;
      error_sum += best_err;
    } else {
      ++report.fp;
    }
  }
  report.fn = ref.size() - report.tp;
  report.no_reference = ref.empty();
  report.no_detections = detected.empty();
  report.sensitivity =
      ref.empty() ? 1.0 : static_cast<double>(report.tp) / static_cast<double>(ref.size());
  report.ppv = detected.empty()
                   ? 1.0
                   : static_cast<double>(report.tp) / static_cast<double>(detected.size());
  report.mean_abs_error_s = report.tp > 0 ? error_sum / static_cast<double>(report.tp) : 0.0;
  return report;
}

void SynthConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (!(fs > 0.0) || !std::isfinite(fs)) fail("fs must be positive");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) fail("duration must be positive");
  if (!(bpm > 0.0) || !std::isfinite(bpm)) fail("bpm must be positive");
  if (!(rr_jitter >= 0.0 && rr_jitter < 1.0)) fail("rr_jitter must lie in [0, 1)");
  if (pattern_index < 1 || pattern_index > 5) fail("pattern_index must be 1..5");
  if (!(qrs_width_s > 0.0) || !std::isfinite(qrs_width_s)) fail("qrs_width must be positive");
  if (!std::isfinite(p_amp) || !std::isfinite(t_amp) || !std::isfinite(baseline_amp)) {
    fail("amplitudes must be finite");
  }
  if (std::isnan(noise_snr_db)) fail("noise_snr_db must not be NaN");
  if (!std::isfinite(baseline_freq_hz) || baseline_freq_hz < 0.0) fail("baseline_freq must be >= 0");
  if (!(p_width_s > 0.0) || !(t_width_s > 0.0)) fail("lobe widths must be positive");
  if (!std::isfinite(p_offset_s) || !std::isfinite(t_offset_s)) fail("lobe offsets must be finite");
}

SynthRecord synth_ecg(const SynthConfig& cfg, std::string record_id) {
  cfg.validate();
  return synth_ecg(cfg, builtin_qrs_patterns()[static_cast<std::size_t>(cfg.pattern_index - 1)],
                   std::move(record_id));
}

SynthRecord synth_ecg(const SynthConfig& cfg, const Pattern& pattern, std::string record_id) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fs));
  if (n < 2) throw Error(ErrorCode::ConfigInvalid, "record would have fewer than 2 samples");

  const auto shape = pattern.samples();
  const std::size_t last = shape.size() - 1;
  std::size_t extremum = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (std::abs(shape[i]) > std::abs(shape[extremum])) extremum = i;
  }

  std::mt19937_64 rng(cfg.seed);
  const double rr = 60.0 / cfg.bpm;

  AnnotationSet truth;
  truth.record_id = record_id;
  double t = rr / 2.0;
  while (t + rr / 2.0 <= cfg.duration_s + 1e-9) {
    const auto r = static_cast<std::size_t>(std::llround(t * cfg.fs));
    if (r >= n) break;
    if (truth.r_samples.empty() || r > truth.r_samples.back()) truth.r_samples.push_back(r);
    double step = rr;
    if (cfg.rr_jitter > 0.0) {
      std::uniform_real_distribution<double> jitter(-cfg.rr_jitter, cfg.rr_jitter);
      step *= 1.0 + jitter(rng);
    }
    t += step;
  }

  std::vector<double> x(n, 0.0);
  const double samples_per_unit = cfg.fs * cfg.qrs_width_s;  // pattern [0,1] -> samples
  const auto lobe = [](double dt, double width) {
    const double u = dt / width;
    return std::exp(-u * u);
  };
  const auto reach = [&](double offset, double width) {
    return static_cast<long long>(std::ceil((std::abs(offset) + 6.0 * width) * cfg.fs));
  };
  const long long lobe_reach =
      std::max({reach(cfg.p_offset_s, cfg.p_width_s), reach(cfg.t_offset_s, cfg.t_width_s),
                static_cast<long long>(std::ceil(samples_per_unit)) + 1});

  for (std::size_t r : truth.r_samples) {
    const auto rr_signed = static_cast<long long>(r);
    const long long lo = std::max<long long>(0, rr_signed - lobe_reach);
    const long long hi = std::min<long long>(static_cast<long long>(n) - 1, rr_signed + lobe_reach);
    for (long long i = lo; i <= hi; ++i) {
      const double offset = static_cast<double>(i - rr_signed);  // samples from R
      const double pos = offset * static_cast<double>(last) / samples_per_unit +
                         static_cast<double>(extremum);
      double v = 0.0;
      if (pos >= 0.0 && pos <= static_cast<double>(last)) {
        const auto j = std::min(static_cast<std::size_t>(pos), last - 1);
        const double frac = pos - static_cast<double>(j);
        v += frac == 0.0 ? shape[j] : shape[j] + frac * (shape[j + 1] - shape[j]);
      }
      const double dt = offset / cfg.fs;
      v += cfg.p_amp * lobe(dt - cfg.p_offset_s, cfg.p_width_s);
      v += cfg.t_amp * lobe(dt - cfg.t_offset_s, cfg.t_width_s);
      x[static_cast<std::size_t>(i)] += v;
    }
  }

  if (cfg.baseline_amp != 0.0) {
    const double w = 2.0 * std::numbers::pi * cfg.baseline_freq_hz / cfg.fs;
    for (std::size_t i = 0; i < n; ++i) x[i] += cfg.baseline_amp * std::sin(w * static_cast<double>(i));
  }

  if (std::isfinite(cfg.noise_snr_db)) {
    // Signal power of the QRS is taken as (peak-to-peak amplitude)^2 / 8, the
    // power of a sinusoid spanning the same excursion.
    const auto [lo, hi] = std::minmax_element(shape.begin(), shape.end());
    const double qrs_power = (*hi - *lo) * (*hi - *lo) / 8.0;
    const double sigma = std::sqrt(qrs_power) * std::pow(10.0, -cfg.noise_snr_db / 20.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : x) v += noise(rng);
  }

  if (cfg.invert) {
    for (double& v : x) v = -v;
  }
  return {EcgSignal(std::move(x), cfg.fs, record_id), std::move(truth)};
}

std::string bench_report_json(const BenchReport& report) {
  const MatchReport& m = report.match;
  nlohmann::ordered_json j;
  j["record"] = report.record_id;
  j["wavelet"] = report.wavelet_name;
  j["wavelet_index"] = report.wavelet_index + 1;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["sensitivity"] = m.sensitivity;
  j["ppv"] = m.ppv;
  j["tolerance_s"] = m.tolerance_s;
  j["mean_abs_error_s"] = m.mean_abs_error_s;
  j["no_detections"] = m.no_detections;
  j["no_reference"] = m.no_reference;
  j["passed"] = m.sensitivity >= report.sensitivity_threshold;

  const DetectionConfig& c = report.config;
  nlohmann::ordered_json cfg;
  cfg["fs"] = report.fs;
  cfg["selection_window"] = c.selection_window;
  cfg["refractory_s"] = c.refractory_s;
  cfg["threshold_fraction"] = c.threshold_fraction;
  cfg["segment_length_s"] = c.segment_length_s;
  cfg["scales_s"] = std::vector<double>(c.scale_grid.scales().begin(), c.scale_grid.scales().end());
  cfg["sensitivity_threshold"] = report.sensitivity_threshold;
  j["config"] = std::move(cfg);
  return j.dump(2) + "\n";
}

std::string bench_summary_csv_line(const BenchReport& report) {
  const MatchReport& m = report.match;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.6f,%.6f,%.6f", m.tp, m.fp, m.fn, m.sensitivity,
                m.ppv, m.mean_abs_error_s);
  return report.record_id + "," + report.wavelet_name + "," + buf;
}

}  // namespace qrsadapt
