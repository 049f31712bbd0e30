#include "qrsadapt/wavelet_design.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numeric>

#include "qrsadapt/error.hpp"

namespace qrsadapt {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteInput, std::string(what) + " contains a non-finite value");
    }
  }
}

double gaussian_lobe(double t, double center, double width) {
  const double u = (t - center) / width;
  return std::exp(-u * u);
}

struct Lobe {
  double amplitude;
  double center;
  double width;
};

std::vector<double> sample_lobes(std::span<const Lobe> lobes, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    for (const Lobe& l : lobes) out[i] += l.amplitude * gaussian_lobe(t, l.center, l.width);
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  for (double& v : out) v /= peak;
  return out;
}

// Householder QR least squares for a dense column-major rows x cols matrix.
// Returns false when a diagonal entry of R collapses relative to the largest.
bool householder_solve(std::vector<double>& a, std::size_t rows, std::size_t cols,
                       std::vector<double>& rhs, std::vector<double>& solution) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[c * rows + r]; };
  std::vector<double> diag(cols, 0.0);
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t r = k; r < rows; ++r) norm = std::hypot(norm, at(r, k));
    if (norm == 0.0) return false;
    const double alpha = at(k, k) > 0.0 ? -norm : norm;
    // v = x - alpha e_1, stored in place of column k.
    at(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t r = k; r < rows; ++r) vnorm2 += at(r, k) * at(r, k);
    diag[k] = alpha;
    if (vnorm2 == 0.0) continue;
    for (std::size_t c = k + 1; c < cols; ++c) {
      double dot = 0.0;
      for (std::size_t r = k; r < rows; ++r) dot += at(r, k) * at(r, c);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t r = k; r < rows; ++r) at(r, c) -= f * at(r, k);
    }
    double dot = 0.0;
    for (std::size_t r = k; r < rows; ++r) dot += at(r, k) * rhs[r];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t r = k; r < rows; ++r) rhs[r] -= f * at(r, k);
  }

  double largest = 0.0;
  for (double d : diag) largest = std::max(largest, std::abs(d));
  for (double d : diag) {
    if (std::abs(d) <= largest * 1e-12) return false;
  }

  solution.assign(cols, 0.0);
  for (std::size_t k = cols; k-- > 0;) {
    double s = rhs[k];
    for (std::size_t c = k + 1; c < cols; ++c) s -= at(k, c) * solution[c];
    solution[k] = s / diag[k];
  }
  return true;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

}  // namespace

Pattern::Pattern(std::string name, std::vector<double> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
  if (samples_.size() < kMinPatternSamples) {
    throw Error(ErrorCode::TooFewSamples,
                "pattern needs at least 8 samples, got " + std::to_string(samples_.size()));
  }
  require_finite(samples_, "pattern");
  const auto [lo, hi] = std::minmax_element(samples_.begin(), samples_.end());
  if (*lo == *hi) {
    throw Error(ErrorCode::DegenerateFit,
                "constant pattern has no component orthogonal to constants");
  }
}

std::vector<double> resample_linear(std::span<const double> samples, std::size_t n_out) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::TooFewSamples, "resampling needs at least 2 input samples");
  }
  if (n_out < kMinPatternSamples) {
    throw Error(ErrorCode::TooFewSamples, "resampling target must have at least 8 points");
  }
  require_finite(samples, "input");

  const std::size_t last_in = samples.size() - 1;
  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(last_in) /
                       static_cast<double>(n_out - 1);
    const auto j = std::min(static_cast<std::size_t>(pos), last_in - 1);
    const double frac = pos - static_cast<double>(j);
    out[i] = samples[j] + frac * (samples[j + 1] - samples[j]);
  }
  out.front() = samples.front();
  out.back() = samples.back();
  return out;
}

Pattern resample_pattern(std::span<const double> samples, std::size_t n_out, std::string name) {
  return Pattern(std::move(name), resample_linear(samples, n_out));
}

double shifted_legendre(int k, double t) {
  const double x = 2.0 * t - 1.0;
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int n = 1; n < k; ++n) {
    const double next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

void shifted_legendre_all(double t, std::span<double> out) {
  if (out.empty()) return;
  const double x = 2.0 * t - 1.0;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t n = 1; n + 1 < out.size(); ++n) {
    const double dn = static_cast<double>(n);
    out[n + 1] = ((2.0 * dn + 1.0) * x * out[n] - dn * out[n - 1]) / (dn + 1.0);
  }
}

double evaluate_zero_mean_expansion(std::span<const double> coeffs, double t) {
  std::vector<double> basis(coeffs.size() + 1);
  shifted_legendre_all(t, basis);
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * basis[k + 1];
  return s;
}

LegendreFit fit_zero_mean_legendre(const Pattern& pattern, int degree, int vanishing_moments) {
  if (vanishing_moments < 1) {
    throw Error(ErrorCode::InvalidArgument, "at least one vanishing moment is required");
  }
  if (degree < vanishing_moments) {
    throw Error(ErrorCode::InvalidArgument, "degree must be at least the number of vanishing moments");
  }
  const std::size_t n = pattern.size();
  const auto d = static_cast<std::size_t>(degree);
  if (d + 1 > n) {
    throw Error(ErrorCode::DegreeTooHigh, "degree " + std::to_string(degree) +
                                              " needs at least " + std::to_string(d + 1) +
                                              " pattern samples, got " + std::to_string(n));
  }

  const auto first = static_cast<std::size_t>(vanishing_moments);
  const std::size_t cols = d + 1 - first;
  std::vector<double> design(n * cols);
  std::vector<double> basis(d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    shifted_legendre_all(pattern.grid_point(i), basis);
    for (std::size_t k = 0; k < cols; ++k) design[k * n + i] = basis[k + first];
  }
  std::vector<double> rhs(pattern.samples().begin(), pattern.samples().end());

  LegendreFit fit;
  std::vector<double> free_coeffs;
  if (!householder_solve(design, n, cols, rhs, free_coeffs)) {
    throw Error(ErrorCode::DegenerateFit, "Legendre design matrix is rank-deficient");
  }
  fit.coeffs.assign(d, 0.0);
  std::copy(free_coeffs.begin(), free_coeffs.end(), fit.coeffs.begin() + static_cast<std::ptrdiff_t>(first - 1));

  double fitted_norm2 = 0.0;
  double pattern_norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = pattern.samples()[i];
    const double psi = evaluate_zero_mean_expansion(fit.coeffs, pattern.grid_point(i));
    fit.residual += (g - psi) * (g - psi);
    fitted_norm2 += psi * psi;
    pattern_norm2 += g * g;
  }
  if (!(fitted_norm2 > pattern_norm2 * 1e-24)) {
    throw Error(ErrorCode::DegenerateFit, "pattern projects to zero on the zero-mean basis");
  }
  return fit;
}

AdaptedWavelet::AdaptedWavelet(std::string name, std::vector<double> basis_coeffs,
                               std::vector<double> sampled)
    : name_(std::move(name)), coeffs_(std::move(basis_coeffs)), sampled_(std::move(sampled)) {
  if (sampled_.size() < 2) {
    throw Error(ErrorCode::EmptyWavelet, "sampled wavelet needs at least 2 points");
  }
  require_finite(sampled_, "wavelet");
  const double dt = 1.0 / static_cast<double>(sampled_.size() - 1);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < sampled_.size(); ++i) {
    energy_ += sampled_[i] * sampled_[i] * dt;
    if (std::abs(sampled_[i]) > std::abs(sampled_[peak])) peak = i;
  }
  t_peak_ = static_cast<double>(peak) * dt;
}

double AdaptedWavelet::operator()(double t) const {
  const std::size_t last = sampled_.size() - 1;
  if (t <= 0.0) return sampled_.front();
  if (t >= 1.0) return sampled_.back();
  const double pos = t * static_cast<double>(last);
  const auto j = std::min(static_cast<std::size_t>(pos), last - 1);
  const double frac = pos - static_cast<double>(j);
  return sampled_[j] + frac * (sampled_[j + 1] - sampled_[j]);
}

AdaptedWavelet fit_adapted_wavelet(const Pattern& pattern, int degree, std::size_t resolution,
                                   int vanishing_moments) {
  if (resolution < 2) {
    throw Error(ErrorCode::InvalidArgument, "wavelet resolution must be at least 2");
  }
  LegendreFit fit = fit_zero_mean_legendre(pattern, degree, vanishing_moments);

  std::vector<double> sampled(resolution);
  const double dt = 1.0 / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    sampled[i] = evaluate_zero_mean_expansion(fit.coeffs, static_cast<double>(i) * dt);
  }
  // The basis integrates to zero exactly; the Riemann sum over the grid does
  // not (even-order P_k pick up an endpoint term), so remove the remainder.
  const double offset =
      std::accumulate(sampled.begin(), sampled.end(), 0.0) / static_cast<double>(resolution);
  double energy = 0.0;
  for (double& v : sampled) {
    v -= offset;
    energy += v * v * dt;
  }
  if (!(energy > 0.0)) {
    throw Error(ErrorCode::DegenerateFit, "fitted wavelet has zero energy");
  }
  const double gain = 1.0 / std::sqrt(energy);
  for (double& v : sampled) v *= gain;
  for (double& c : fit.coeffs) c *= gain;
  return AdaptedWavelet(pattern.name(), std::move(fit.coeffs), std::move(sampled));
}

AdmissibilityReport check_admissibility(const AdaptedWavelet& wavelet) {
  return check_admissibility(wavelet.sampled());
}

AdmissibilityReport check_admissibility(std::span<const double> sampled) {
  if (sampled.empty()) throw Error(ErrorCode::EmptyWavelet, "wavelet has no samples");
  AdmissibilityReport report;
  const std::size_t m = sampled.size();
  const double dt = m > 1 ? 1.0 / static_cast<double>(m - 1) : 1.0;

  double mean = 0.0;
  for (double v : sampled) {
    mean += v * dt;
    report.energy += v * v * dt;
  }
  report.mean_abs = std::abs(mean);

  // One-sided DFT of the zero-padded wavelet. With Psi(f_k) = dt * X_k,
  // f_k = k / (P dt) and df = 1 / (P dt), each term |Psi|^2 / f_k * df
  // reduces to dt^2 |X_k|^2 / k.
  std::size_t padded = 1;
  while (padded < 16 * m) padded <<= 1;
  const std::size_t bins = padded / 2 + 1;
  std::unique_ptr<double[], decltype(&fftw_free)> in(
      static_cast<double*>(fftw_malloc(sizeof(double) * padded)), &fftw_free);
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)), &fftw_free);
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(fftw_plan_dft_r2c_1d(
      static_cast<int>(padded), in.get(), out.get(), FFTW_ESTIMATE));
  std::fill(in.get(), in.get() + padded, 0.0);
  std::copy(sampled.begin(), sampled.end(), in.get());
  fftw_execute(plan.get());

  double c_g = 0.0;
  for (std::size_t k = 1; k < bins; ++k) {
    const double mag2 = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    c_g += mag2 / static_cast<double>(k);
  }
  report.c_g = c_g * dt * dt;

  report.admissible = std::isfinite(report.energy) && report.energy > 0.0 &&
                      report.mean_abs <= kAdmissibleMeanTolerance && std::isfinite(report.c_g);
  return report;
}

std::vector<Pattern> builtin_qrs_patterns() {
  // Sums of lobes a * exp(-((t - mu) / w)^2); each pattern is scaled to unit
  // peak magnitude after summation.
  // Lobes are broad enough that a degree-8 expansion follows them without
  // ringing, and the five shapes stay distinguishable after the constant and
  // linear parts are projected out.
  static constexpr Lobe kQRs[] = {{-0.40, 0.15, 0.16}, {1.00, 0.56, 0.125}, {-0.43, 0.78, 0.13}};
  static constexpr Lobe kRS[] = {{0.60, 0.31, 0.115}, {-1.00, 0.52, 0.14}, {0.33, 0.91, 0.09}};
  // notched QS: two deep Q/S troughs with a broad notch between them
  static constexpr Lobe kQS[] = {{-1.00, 0.29, 0.085}, {0.71, 0.50, 0.30}, {-1.00, 0.74, 0.097}};
  static constexpr Lobe kRSR[] = {{0.46, 0.24, 0.10}, {-0.70, 0.41, 0.14}, {1.00, 0.67, 0.10}};
  static constexpr Lobe kBiphasic[] = {
      {0.17, 0.12, 0.086}, {-1.00, 0.41, 0.134}, {1.00, 0.62, 0.20}, {-0.46, 0.925, 0.12}};

  std::vector<Pattern> bank;
  bank.emplace_back("qRs", sample_lobes(kQRs, kBuiltinPatternSamples));
  bank.emplace_back("rS", sample_lobes(kRS, kBuiltinPatternSamples));
  bank.emplace_back("QS", sample_lobes(kQS, kBuiltinPatternSamples));
  bank.emplace_back("RSR'", sample_lobes(kRSR, kBuiltinPatternSamples));
  bank.emplace_back("biphasic", sample_lobes(kBiphasic, kBuiltinPatternSamples));
  return bank;
}

std::vector<AdaptedWavelet> builtin_wavelet_bank(int degree, int vanishing_moments) {
  std::vector<AdaptedWavelet> bank;
  int index = 1;
  for (const Pattern& p : builtin_qrs_patterns()) {
    AdaptedWavelet fitted = fit_adapted_wavelet(p, degree, kDefaultResolution, vanishing_moments);
    bank.emplace_back("ADW" + std::to_string(index++),
                      std::vector<double>(fitted.basis_coeffs().begin(), fitted.basis_coeffs().end()),
                      std::vector<double>(fitted.sampled().begin(), fitted.sampled().end()));
  }
  return bank;
}

}  // namespace qrsadapt
