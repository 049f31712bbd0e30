#pragma once

// Two-phase R-peak detection with a bank of adapted wavelets.
//
// Phase 1 transforms the first `selection_window` samples with every wavelet
// in the bank and keeps the wavelet whose largest |W| is highest. Phase 2
// transforms the whole record with that wavelet, thresholds coefficient
// maxima against a per-segment relative level, maps each surviving maximum
// to an R position and enforces an absolute refractory period.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qrsadapt/cwt.hpp"
#include "qrsadapt/wavelet_design.hpp"

namespace qrsadapt {

struct DetectionConfig {
  std::size_t selection_window = 250;  // samples
  double refractory_s = 0.192;
  double threshold_fraction = 0.4;  // eta, in (0, 1)
  double segment_length_s = 2.5;
  ScaleGrid scale_grid = ScaleGrid::default_grid();
  unsigned threads = 0;  // 0: QRSADAPT_THREADS or 1

  // Throws ConfigInvalid (or ScaleTooSmall for the grid).
  void validate(double fs) const;
  std::size_t refractory_samples(double fs) const;
};

struct RPeak {
  std::size_t sample = 0;
  double time_s = 0.0;
  double scale = 0.0;
  double magnitude = 0.0;
  int polarity = 1;  // sign of the coefficient

  friend bool operator==(const RPeak&, const RPeak&) = default;
};

struct WaveletSelection {
  std::size_t index = 0;                // 0-based position in the bank
  std::vector<double> per_wavelet_max;  // max |W| over the window, per wavelet
};

struct DetectionResult {
  std::string record_id;
  std::vector<RPeak> peaks;
  std::string wavelet_name;
  std::size_t wavelet_index = 0;  // 0-based; reported 1-based
  std::vector<double> per_wavelet_max;
};

// Throws EmptyBank or SignalTooShort.
WaveletSelection select_wavelet(const EcgSignal& signal, std::span<const AdaptedWavelet> bank,
                                const DetectionConfig& cfg);

// Phase 2 with a fixed wavelet. per_wavelet_max is left empty.
DetectionResult detect_r_peaks(const EcgSignal& signal, const AdaptedWavelet& wavelet,
                               const DetectionConfig& cfg);

// Greedy keep-by-magnitude in the given order (callers pass candidates sorted
// by descending magnitude): a candidate is kept when it lies at least
// refractory_samples from every kept peak. Output is sorted by sample.
std::vector<RPeak> apply_refractory(std::span<const RPeak> candidates,
                                    std::size_t refractory_samples);

DetectionResult run_two_phase(const EcgSignal& signal, std::span<const AdaptedWavelet> bank,
                              const DetectionConfig& cfg);

}  // namespace qrsadapt
