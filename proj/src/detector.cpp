#include "qrsadapt/detector.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>

#include "qrsadapt/error.hpp"

namespace qrsadapt {

void DetectionConfig::validate(double fs) const {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "threshold fraction must lie in (0, 1)");
  }
  if (!(refractory_s > 0.0) || !std::isfinite(refractory_s)) {
    throw Error(ErrorCode::ConfigInvalid, "refractory period must be positive");
  }
  if (!(segment_length_s > 0.0) || !std::isfinite(segment_length_s)) {
    throw Error(ErrorCode::ConfigInvalid, "segment length must be positive");
  }
  scale_grid.validate_for(fs);
  if (selection_window < kernel_length(scale_grid.max_scale(), fs)) {
    throw Error(ErrorCode::ConfigInvalid,
                "selection window is shorter than the largest wavelet kernel");
  }
}

std::size_t DetectionConfig::refractory_samples(double fs) const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(refractory_s * fs)));
}

WaveletSelection select_wavelet(const EcgSignal& signal, std::span<const AdaptedWavelet> bank,
                                const DetectionConfig& cfg) {
  if (bank.empty()) throw Error(ErrorCode::EmptyBank, "wavelet bank is empty");
  cfg.validate(signal.fs());
  if (signal.size() < cfg.selection_window) {
    throw Error(ErrorCode::SignalTooShort,
                "signal has " + std::to_string(signal.size()) + " samples; selection window needs " +
                    std::to_string(cfg.selection_window));
  }

  const EcgSignal window = signal.prefix(cfg.selection_window);
  WaveletSelection selection;
  selection.per_wavelet_max.reserve(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const double peak = cwt(window, bank[i], cfg.scale_grid, cfg.threads).max_abs();
    selection.per_wavelet_max.push_back(peak);
    if (peak > selection.per_wavelet_max[selection.index]) selection.index = i;
  }
  return selection;
}

std::vector<RPeak> apply_refractory(std::span<const RPeak> candidates,
                                    std::size_t refractory_samples) {
  refractory_samples = std::max<std::size_t>(refractory_samples, 1);
  std::set<std::size_t> taken;
  std::vector<RPeak> kept;
  for (const RPeak& c : candidates) {
    auto next = taken.lower_bound(c.sample);
    if (next != taken.end() && *next - c.sample < refractory_samples) continue;
    if (next != taken.begin() && c.sample - *std::prev(next) < refractory_samples) continue;
    taken.insert(c.sample);
    kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const RPeak& lhs, const RPeak& rhs) { return lhs.sample < rhs.sample; });
  return kept;
}

DetectionResult detect_r_peaks(const EcgSignal& signal, const AdaptedWavelet& wavelet,
                               const DetectionConfig& cfg) {
  cfg.validate(signal.fs());
  const double fs = signal.fs();
  const std::size_t n = signal.size();
  if (n < kernel_length(cfg.scale_grid.max_scale(), fs)) {
    throw Error(ErrorCode::SignalTooShort, "signal is shorter than the largest wavelet kernel");
  }

  DetectionResult result;
  result.record_id = signal.record_id();
  result.wavelet_name = wavelet.name();

  const CwtMatrix matrix = cwt(signal, wavelet, cfg.scale_grid, cfg.threads);

  const std::size_t segment =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.segment_length_s * fs)));
  std::vector<double> segment_max((n + segment - 1) / segment, 0.0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto row = matrix.row(r);
    for (std::size_t b = 0; b < n; ++b) {
      double& m = segment_max[b / segment];
      m = std::max(m, std::abs(row[b]));
    }
  }

  std::vector<RPeak> candidates;
  for (const CoefficientPeak& p : find_coefficient_maxima(matrix, 0.0)) {
    const double theta = cfg.threshold_fraction * segment_max[p.sample_b / segment];
    if (p.magnitude <= 0.0 || p.magnitude < theta) continue;
    const std::size_t len = kernel_length(p.scale, fs);
    if (p.sample_b + len > n) continue;
    const auto offset =
        static_cast<std::size_t>(std::llround(wavelet.t_peak() * static_cast<double>(len - 1)));
    const std::size_t r_sample = p.sample_b + offset;
    candidates.push_back({r_sample, static_cast<double>(r_sample) / fs, p.scale, p.magnitude,
                          p.value < 0.0 ? -1 : 1});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const RPeak& lhs, const RPeak& rhs) {
    if (lhs.magnitude != rhs.magnitude) return lhs.magnitude > rhs.magnitude;
    if (lhs.sample != rhs.sample) return lhs.sample < rhs.sample;
    return lhs.scale < rhs.scale;
  });

  result.peaks = apply_refractory(candidates, cfg.refractory_samples(fs));
  return result;
}

DetectionResult run_two_phase(const EcgSignal& signal, std::span<const AdaptedWavelet> bank,
                              const DetectionConfig& cfg) {
  WaveletSelection selection = select_wavelet(signal, bank, cfg);
  DetectionResult result = detect_r_peaks(signal, bank[selection.index], cfg);
  result.wavelet_index = selection.index;
  result.per_wavelet_max = std::move(selection.per_wavelet_max);
  return result;
}

}  // namespace qrsadapt
