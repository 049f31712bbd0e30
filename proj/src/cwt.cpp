#include "qrsadapt/cwt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "qrsadapt/error.hpp"

namespace qrsadapt {

EcgSignal::EcgSignal(std::vector<double> samples, double fs, std::string record_id)
    : samples_(std::move(samples)), fs_(fs), record_id_(std::move(record_id)) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
    throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  }
  if (samples_.size() < 2) {
    throw Error(ErrorCode::TooFewSamples, "signal needs at least 2 samples");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "signal contains a non-finite sample");
  }
}

EcgSignal EcgSignal::prefix(std::size_t n) const {
  n = std::min(n, samples_.size());
  return EcgSignal(std::vector<double>(samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(n)),
                   fs_, record_id_);
}

ScaleGrid::ScaleGrid(std::vector<double> scales) : scales_(std::move(scales)) {
  if (scales_.empty()) throw Error(ErrorCode::InvalidArgument, "scale grid is empty");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (!(scales_[i] > 0.0) || !std::isfinite(scales_[i])) {
      throw Error(ErrorCode::InvalidArgument, "scales must be positive and finite");
    }
    if (i > 0 && !(scales_[i] > scales_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "scales must be strictly increasing");
    }
  }
}

ScaleGrid ScaleGrid::log_spaced(double lo, double hi, std::size_t n) {
  if (n == 0 || !(lo > 0.0) || (n > 1 && !(hi > lo))) {
    throw Error(ErrorCode::InvalidArgument, "invalid log-spaced scale range");
  }
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    s[i] = lo * std::pow(hi / lo, frac);
  }
  s.back() = n == 1 ? lo : hi;
  return ScaleGrid(std::move(s));
}

// Tops out at 120 ms: wider kernels reach the T wave and the P-R segment and
// let tall T waves compete with the QRS.
ScaleGrid ScaleGrid::default_grid() { return log_spaced(0.04, 0.12, 16); }

void ScaleGrid::validate_for(double fs) const {
  for (double a : scales_) {
    if (kernel_length(a, fs) < kMinKernelLength) {
      throw Error(ErrorCode::ScaleTooSmall,
                  "scale " + std::to_string(a) + " s spans fewer than 4 samples at " +
                      std::to_string(fs) + " Hz");
    }
  }
}

std::size_t kernel_length(double scale, double fs) {
  const double len = std::round(scale * fs);
  return len > 0.0 ? static_cast<std::size_t>(len) : 0;
}

CwtMatrix::CwtMatrix(ScaleGrid scales, double fs, std::size_t columns)
    : scales_(std::move(scales)), fs_(fs), columns_(columns), coeffs_(scales_.size() * columns, 0.0) {}

double CwtMatrix::max_abs() const {
  double m = 0.0;
  for (double v : coeffs_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> sample_wavelet_at_scale(const AdaptedWavelet& wavelet, double scale, double fs) {
  const std::size_t len = kernel_length(scale, fs);
  if (len < kMinKernelLength) {
    throw Error(ErrorCode::ScaleTooSmall, "kernel length " + std::to_string(len) +
                                              " is below the minimum of 4 samples");
  }
  std::vector<double> kernel(len);
  for (std::size_t j = 0; j < len; ++j) {
    kernel[j] = wavelet(static_cast<double>(j) / static_cast<double>(len - 1));
  }
  return kernel;
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QRSADAPT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

namespace {

void transform_row(std::span<const double> x, std::span<const double> kernel, double scale,
                   double fs, std::span<double> out) {
  const double norm = 1.0 / (std::sqrt(scale) * fs);
  const std::size_t n = x.size();
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t span_len = std::min(kernel.size(), n - b);
    double acc = 0.0;
    for (std::size_t j = 0; j < span_len; ++j) acc += x[b + j] * kernel[j];
    out[b] = acc * norm;
  }
}

}  // namespace

CwtMatrix cwt(const EcgSignal& signal, const AdaptedWavelet& wavelet, const ScaleGrid& grid,
              unsigned threads) {
  grid.validate_for(signal.fs());
  CwtMatrix matrix(grid, signal.fs(), signal.size());

  std::vector<std::vector<double>> kernels;
  kernels.reserve(grid.size());
  for (double a : grid.scales()) kernels.push_back(sample_wavelet_at_scale(wavelet, a, signal.fs()));

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t r = first; r < grid.size(); r += stride) {
      transform_row(signal.samples(), kernels[r], grid[r], signal.fs(), matrix.row(r));
    }
  };

  const std::size_t workers = std::min<std::size_t>(resolve_thread_count(threads), grid.size());
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
  }
  return matrix;
}

std::vector<CoefficientPeak> find_coefficient_maxima(const CwtMatrix& matrix, double threshold) {
  if (threshold < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold must be non-negative");
  std::vector<CoefficientPeak> peaks;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto row = matrix.row(r);
    for (std::size_t b = 1; b + 1 < row.size(); ++b) {
      const double mag = std::abs(row[b]);
      if (mag > std::abs(row[b - 1]) && mag > std::abs(row[b + 1]) && mag >= threshold) {
        peaks.push_back({b, r, matrix.scales()[r], row[b], mag});
      }
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const CoefficientPeak& lhs, const CoefficientPeak& rhs) {
    return lhs.sample_b != rhs.sample_b ? lhs.sample_b < rhs.sample_b
                                        : lhs.scale_index < rhs.scale_index;
  });
  return peaks;
}

}  // namespace qrsadapt
