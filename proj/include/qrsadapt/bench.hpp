#pragma once

// Detection scoring and synthetic ECG fixtures with ground truth.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qrsadapt/cwt.hpp"
#include "qrsadapt/detector.hpp"
#include "qrsadapt/wavelet_design.hpp"
#include "qrsadapt/signal_io.hpp"

namespace qrsadapt {

inline constexpr double kDefaultMatchTolerance = 0.050;  // seconds

struct MatchReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double sensitivity = 0.0;  // tp / (tp + fn); 1 when there is no reference beat
  double ppv = 0.0;          // tp / (tp + fp); 1 with no_detections set when nothing was detected
  double tolerance_s = kDefaultMatchTolerance;
  double mean_abs_error_s = 0.0;  // over matched pairs; 0 when none matched
  bool no_detections = false;
  bool no_reference = false;
};

// Greedy one-to-one matching in detection time order: each detection takes
// the nearest still-unmatched annotation within the tolerance (earlier one
// on ties). Sample indices are converted to seconds with fs.
MatchReport match_peaks(std::span<const RPeak> detected, const AnnotationSet& reference,
                        double tolerance_s, double fs);

struct SynthConfig {
  double fs = 360.0;
  double duration_s = 30.0;
  double bpm = 60.0;
  double rr_jitter = 0.0;  // uniform +- fraction of RR
  int pattern_index = 1;   // 1..5 into builtin_qrs_patterns()
  double qrs_width_s = 0.1;
  double p_amp = 0.15;  // relative to the QRS peak magnitude
  double t_amp = 0.3;
  // vs. QRS power taken as (peak-to-peak)^2 / 8; +inf disables noise
  double noise_snr_db = std::numeric_limits<double>::infinity();
  double baseline_amp = 0.0;  // relative to the QRS peak magnitude
  double baseline_freq_hz = 0.3;
  bool invert = false;
  std::uint64_t seed = 0;

  // Lobe geometry, G(t) = exp(-((t - c) / w)^2) with c relative to R.
  double p_offset_s = -0.16;
  double p_width_s = 0.025;
  double t_offset_s = 0.16;
  double t_width_s = 0.045;

  void validate() const;  // throws ConfigInvalid
};

struct SynthRecord {
  EcgSignal signal;
  AnnotationSet annotations;
};

// Beats start RR/2 into the record and are added while a full half-RR fits
// after the R sample. Ground-truth R is the sample carrying the QRS pattern's
// largest-magnitude point. Randomness (jitter, then noise) comes only from
// a generator seeded with cfg.seed; inversion is applied last.
SynthRecord synth_ecg(const SynthConfig& cfg, std::string record_id = "synthetic");

// Same, but beats use `pattern` instead of the builtin selected by
// cfg.pattern_index (which is then ignored).
SynthRecord synth_ecg(const SynthConfig& cfg, const Pattern& pattern,
                      std::string record_id = "synthetic");

struct BenchReport {
  std::string record_id;
  std::string wavelet_name;
  std::size_t wavelet_index = 0;  // 0-based
  MatchReport match;
  DetectionConfig config;
  double fs = 0.0;
  double sensitivity_threshold = 0.99;
};

std::string bench_report_json(const BenchReport& report);
inline constexpr const char* kSummaryCsvHeader = "record,wavelet,tp,fp,fn,sensitivity,ppv,mae_s";
std::string bench_summary_csv_line(const BenchReport& report);

}  // namespace qrsadapt
