#pragma once

// Continuous wavelet transform of a sampled signal against a sampled real
// wavelet:
//
//   W(a, b) = 1/sqrt(a) * sum_{j=0..L-1} x[b + j] * psi(j / (L-1)) / fs
//
// with L = round(a * fs). The wavelet's [0,1] support spans a seconds and b
// is the left edge of the support. Samples outside the signal are zero.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qrsadapt/wavelet_design.hpp"

namespace qrsadapt {

inline constexpr std::size_t kMinKernelLength = 4;

class EcgSignal {
 public:
  // Throws TooFewSamples (length < 2), NonFiniteInput, or InvalidArgument
  // for fs <= 0.
  EcgSignal(std::vector<double> samples, double fs, std::string record_id = "");

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double fs() const noexcept { return fs_; }
  const std::string& record_id() const noexcept { return record_id_; }

  // First n samples as a new signal with the same fs and record id.
  EcgSignal prefix(std::size_t n) const;

 private:
  std::vector<double> samples_;
  double fs_;
  std::string record_id_;
};

class ScaleGrid {
 public:
  // Scales in seconds; must be positive and strictly increasing.
  explicit ScaleGrid(std::vector<double> scales);

  // n logarithmically spaced scales in [lo, hi].
  static ScaleGrid log_spaced(double lo, double hi, std::size_t n);
  // 16 scales from 40 ms to 120 ms.
  static ScaleGrid default_grid();

  std::span<const double> scales() const noexcept { return scales_; }
  std::size_t size() const noexcept { return scales_.size(); }
  double operator[](std::size_t i) const noexcept { return scales_[i]; }
  double max_scale() const noexcept { return scales_.back(); }

  // Throws ScaleTooSmall if some scale has fewer than 4 samples at fs.
  void validate_for(double fs) const;

 private:
  std::vector<double> scales_;
};

// Kernel length round(a * fs).
std::size_t kernel_length(double scale, double fs);

class CwtMatrix {
 public:
  CwtMatrix(ScaleGrid scales, double fs, std::size_t columns);

  const ScaleGrid& scales() const noexcept { return scales_; }
  double fs() const noexcept { return fs_; }
  std::size_t rows() const noexcept { return scales_.size(); }
  std::size_t columns() const noexcept { return columns_; }

  std::span<const double> row(std::size_t r) const {
    return {coeffs_.data() + r * columns_, columns_};
  }
  std::span<double> row(std::size_t r) { return {coeffs_.data() + r * columns_, columns_}; }
  double at(std::size_t r, std::size_t c) const { return coeffs_[r * columns_ + c]; }
  double max_abs() const;

 private:
  ScaleGrid scales_;
  double fs_;
  std::size_t columns_;
  std::vector<double> coeffs_;
};

struct CoefficientPeak {
  std::size_t sample_b = 0;     // left edge of the wavelet support
  std::size_t scale_index = 0;  // row in the matrix
  double scale = 0.0;           // seconds
  double value = 0.0;           // signed coefficient
  double magnitude = 0.0;       // |value|
};

// kernel[j] = psi(j / (L-1)), L = round(a * fs). Throws ScaleTooSmall for L < 4.
std::vector<double> sample_wavelet_at_scale(const AdaptedWavelet& wavelet, double scale,
                                            double fs);

// Worker threads used by the engine: `requested` when nonzero, otherwise the
// QRSADAPT_THREADS environment variable, otherwise 1.
unsigned resolve_thread_count(unsigned requested);

// Rows are computed independently, so the result does not depend on the
// thread count.
CwtMatrix cwt(const EcgSignal& signal, const AdaptedWavelet& wavelet, const ScaleGrid& grid,
              unsigned threads = 0);

// Strict local maxima of |W| along b within each row with |W| >= threshold,
// sorted by sample_b then scale. The first and last columns are never maxima.
std::vector<CoefficientPeak> find_coefficient_maxima(const CwtMatrix& matrix, double threshold);

}  // namespace qrsadapt
