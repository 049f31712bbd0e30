#pragma once

// Pattern-adapted wavelet construction.
//
// A pattern g sampled on the uniform grid t_i = i/(N-1) over [0,1] is
// approximated by psi(t) = sum_{k=1..d} c_k P_k(t), where P_k are the shifted
// Legendre polynomials on [0,1]. Dropping P_0 makes psi orthogonal to
// constants on [0,1], so the constrained least-squares problem reduces to an
// ordinary one over the remaining d basis functions.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qrsadapt {

inline constexpr int kDefaultDegree = 8;
inline constexpr std::size_t kDefaultResolution = 1024;
inline constexpr std::size_t kMinPatternSamples = 8;
inline constexpr std::size_t kBuiltinPatternSamples = 256;

// QRS-shaped template on the implicit grid t_i = i/(N-1).
class Pattern {
 public:
  // Throws TooFewSamples (N < 8), NonFiniteInput, or DegenerateFit when all
  // samples are equal.
  Pattern(std::string name, std::vector<double> samples);

  const std::string& name() const noexcept { return name_; }
  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double grid_point(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(samples_.size() - 1);
  }

 private:
  std::string name_;
  std::vector<double> samples_;
};

// Linear interpolation of arbitrary-length samples onto n_out uniform points
// over [0,1]. Endpoints are preserved. Constant input is allowed here; it is
// rejected when wrapped into a Pattern.
std::vector<double> resample_linear(std::span<const double> samples,
                                    std::size_t n_out);

// resample_linear + Pattern construction.
Pattern resample_pattern(std::span<const double> samples, std::size_t n_out,
                         std::string name = "pattern");

/// Shifted Legendre polynomial P_k(t) = L_k(2t - 1) on [0,1].
double shifted_legendre(int k, double t);

/// Fills out[k] = P_k(t) for k = 0..out.size()-1 by the three-term recurrence.
void shifted_legendre_all(double t, std::span<double> out);

/// sum_{k=1..d} coeffs[k-1] * P_k(t).
double evaluate_zero_mean_expansion(std::span<const double> coeffs, double t);

// Raw least-squares fit, before any normalization.
struct LegendreFit {
  std::vector<double> coeffs;  // c_1..c_d
  double residual = 0.0;       // sum_i (g_i - psi(t_i))^2
};

// Minimizes sum_i (g(t_i) - sum_{k=1..d} c_k P_k(t_i))^2 with a Householder
// QR factorization of the N x d design matrix. With vanishing_moments = m > 1
// the coefficients c_1..c_{m-1} are pinned to zero, which additionally makes
// psi orthogonal to polynomials of degree < m.
// Throws DegreeTooHigh when d + 1 > N and DegenerateFit when the design
// matrix is numerically rank-deficient or the projection vanishes.
LegendreFit fit_zero_mean_legendre(const Pattern& pattern, int degree, int vanishing_moments = 1);

// An admissible wavelet on [0,1] together with its sampled form.
class AdaptedWavelet {
 public:
  // Builds a wavelet from an explicit sampled form (M >= 2). Energy and
  // t_peak are derived from the samples. basis_coeffs may be empty for
  // wavelets that were not produced by the fitter.
  AdaptedWavelet(std::string name, std::vector<double> basis_coeffs,
                 std::vector<double> sampled);

  const std::string& name() const noexcept { return name_; }
  std::span<const double> basis_coeffs() const noexcept { return coeffs_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()); }
  std::span<const double> sampled() const noexcept { return sampled_; }
  std::size_t resolution() const noexcept { return sampled_.size(); }
  double t_peak() const noexcept { return t_peak_; }
  double energy() const noexcept { return energy_; }

  // psi(t) for t in [0,1] by linear interpolation of the sampled form.
  double operator()(double t) const;

 private:
  std::string name_;
  std::vector<double> coeffs_;
  std::vector<double> sampled_;
  double t_peak_ = 0.0;
  double energy_ = 0.0;
};

// Fits the pattern, samples the expansion on `resolution` points, removes the
// residual discrete mean and rescales to unit discrete energy.
AdaptedWavelet fit_adapted_wavelet(const Pattern& pattern,
                                   int degree = kDefaultDegree,
                                   std::size_t resolution = kDefaultResolution,
                                   int vanishing_moments = 1);

struct AdmissibilityReport {
  double mean_abs = 0.0;  // |sum psi_i dt|
  double energy = 0.0;    // sum psi_i^2 dt
  double c_g = 0.0;       // sum_{f_k > 0} |Psi(f_k)|^2 / f_k * df
  bool admissible = false;
};

inline constexpr double kAdmissibleMeanTolerance = 1e-6;

AdmissibilityReport check_admissibility(const AdaptedWavelet& wavelet);

// Same checks for a bare sampled form on the uniform grid over [0,1].
// Throws EmptyWavelet on empty input.
AdmissibilityReport check_admissibility(std::span<const double> sampled);

// Five stand-in QRS morphologies (256 samples each, peak |amplitude| 1):
// upright qRs, rS, QS, notched RSR', biphasic/inverted.
std::vector<Pattern> builtin_qrs_patterns();

// Vanishing moments used for the builtin bank. Two moments make the wavelets
// blind to linear baseline drift across the kernel support, not just to DC.
inline constexpr int kBankVanishingMoments = 2;

// The builtin bank fitted at the given degree, named "ADW1".."ADW5".
std::vector<AdaptedWavelet> builtin_wavelet_bank(int degree = kDefaultDegree,
                                                 int vanishing_moments = kBankVanishingMoments);

}  // namespace qrsadapt
