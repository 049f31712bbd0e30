#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qrsadapt/wavelet_design.hpp"
#include "test_util.hpp"

using namespace qrsadapt;

namespace {

std::vector<double> grid_values(std::size_t n, double (*f)(double)) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

std::vector<double> random_pattern(std::mt19937_64& rng, std::size_t n) {
  // smooth-ish random shape: a few random Gaussian lobes plus small noise
  std::uniform_real_distribution<double> amp(-1.0, 1.0), ctr(0.1, 0.9), wid(0.05, 0.3);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> v(n, 0.0);
  const int lobes = 2 + static_cast<int>(rng() % 3);
  for (int l = 0; l < lobes; ++l) {
    const double a = amp(rng), c = ctr(rng), w = wid(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(i) / static_cast<double>(n - 1) - c) / w;
      v[i] += a * std::exp(-u * u);
    }
  }
  for (double& x : v) x += noise(rng);
  return v;
}

double rel_diff(const std::vector<double>& a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(a[i]));
  }
  return num / den;
}

double discrete_mean(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size() - 1);
}

double discrete_energy(std::span<const double> s) {
  double e = 0.0;
  for (double v : s) e += v * v;
  return e / static_cast<double>(s.size() - 1);
}

}  // namespace

TEST(Pattern, RejectsShortNonFiniteAndConstant) {
  expect_error(ErrorCode::TooFewSamples, [] { Pattern("p", std::vector<double>(7, 1.0)); });
  std::vector<double> v(16, 0.0);
  v[3] = 1.0;
  v[5] = std::nan("");
  expect_error(ErrorCode::NonFiniteInput, [&] { Pattern("p", v); });
  v[5] = INFINITY;
  expect_error(ErrorCode::NonFiniteInput, [&] { Pattern("p", v); });
  expect_error(ErrorCode::DegenerateFit, [] { Pattern("p", std::vector<double>(16, 3.0)); });
}

TEST(Pattern, GridPoints) {
  Pattern p("p", {0, 1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_DOUBLE_EQ(p.grid_point(0), 0.0);
  EXPECT_DOUBLE_EQ(p.grid_point(4), 0.5);
  EXPECT_DOUBLE_EQ(p.grid_point(8), 1.0);
}

TEST(Resample, KeepsEndpointsAndLines) {
  const std::vector<double> in{1.0, 3.0, 5.0};
  const auto out = resample_linear(in, 9);
  ASSERT_EQ(out.size(), 9u);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], 1.0 + 0.5 * static_cast<double>(i), 1e-14);
  EXPECT_EQ(resample_pattern(in, 64, "x").size(), 64u);
}

TEST(ShiftedLegendre, MatchesExplicitFormula) {
  std::vector<double> all(13);
  for (double t : {0.0, 0.1, 0.37, 0.5, 0.81, 1.0}) {
    shifted_legendre_all(t, all);
    for (int k = 0; k <= 12; ++k) {
      EXPECT_NEAR(shifted_legendre(k, t), oracle::shifted_legendre_explicit(k, t), 1e-11) << k;
      EXPECT_NEAR(all[static_cast<std::size_t>(k)], shifted_legendre(k, t), 1e-13);
    }
  }
  EXPECT_DOUBLE_EQ(shifted_legendre(5, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(shifted_legendre(5, 0.0), -1.0);
}

TEST(ShiftedLegendre, HigherOrdersIntegrateToZero) {
  // 20-point Gauss is exact for these degrees
  using boost::math::quadrature::gauss;
  for (int k = 1; k <= 12; ++k) {
    const double s = gauss<double, 20>::integrate([k](double t) { return shifted_legendre(k, t); }, 0.0, 1.0);
    EXPECT_NEAR(s, 0.0, 1e-14) << k;
  }
}

TEST(Fit, LinearPatternDegreeOneIsP1) {
  const auto g = grid_values(64, [](double t) { return t - 0.5; });
  const auto fit = fit_zero_mean_legendre(Pattern("lin", g), 1);
  ASSERT_EQ(fit.coeffs.size(), 1u);
  EXPECT_NEAR(fit.coeffs[0], 0.5, 1e-12);  // t - 1/2 = P_1 / 2
  EXPECT_NEAR(fit.residual, 0.0, 1e-20);

  const auto w = fit_adapted_wavelet(Pattern("lin", g), 1, 64);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sxy += g[i] * w.sampled()[i];
    sxx += g[i] * g[i];
    syy += w.sampled()[i] * w.sampled()[i];
  }
  EXPECT_NEAR(sxy / std::sqrt(sxx * syy), 1.0, 1e-9);
}

TEST(Fit, GaussianBumpMatchesDenseOracle) {
  const auto g = grid_values(128, [](double t) {
    const double u = (t - 0.5) / 0.12;
    return std::exp(-u * u);
  });
  const auto fit = fit_zero_mean_legendre(Pattern("bump", g), 8);
  const auto ref = oracle::dense_legendre_lsq(g, 8);
  EXPECT_LT(rel_diff(ref.coeffs, fit.coeffs), 1e-8);
  EXPECT_NEAR(fit.residual, ref.residual, 1e-10 * std::max(1.0, ref.residual));
}

TEST(Fit, RandomPatternsMatchBothOracles) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 32 + rng() % 300;
    const int degree = 1 + static_cast<int>(rng() % 12);
    const auto g = random_pattern(rng, n);
    const auto fit = fit_zero_mean_legendre(Pattern("r", g), degree);
    const auto qr = oracle::dense_legendre_lsq(g, degree);
    const auto ne = oracle::normal_equations_lsq(g, degree);
    EXPECT_LT(rel_diff(qr.coeffs, fit.coeffs), 1e-8) << "n=" << n << " d=" << degree;
    EXPECT_LT(rel_diff(ne.coeffs, fit.coeffs), 1e-6) << "n=" << n << " d=" << degree;
    // optimality: no other zero-mean degree-d polynomial does better
    EXPECT_GE(qr.residual - fit.residual, -1e-9 * std::max(1.0, qr.residual));
  }
}

TEST(Fit, VanishingMomentsPinLowCoefficients) {
  std::mt19937_64 rng(11);
  const auto g = random_pattern(rng, 200);
  const auto fit = fit_zero_mean_legendre(Pattern("r", g), 8, 3);
  EXPECT_EQ(fit.coeffs[0], 0.0);
  EXPECT_EQ(fit.coeffs[1], 0.0);
  const auto ref = oracle::dense_legendre_lsq(g, 8, 3);
  EXPECT_LT(rel_diff(ref.coeffs, fit.coeffs), 1e-8);
}

TEST(Fit, ResidualIsMonotoneInDegree) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Pattern p("r", random_pattern(rng, 150));
    double prev = INFINITY;
    for (int d = 1; d <= 12; ++d) {
      const double r = fit_zero_mean_legendre(p, d).residual;
      EXPECT_LE(r, prev + 1e-10);
      prev = r;
    }
  }
}

TEST(Fit, Errors) {
  const auto g = grid_values(16, [](double t) { return std::sin(6 * t); });
  expect_error(ErrorCode::DegreeTooHigh, [&] { fit_zero_mean_legendre(Pattern("p", g), 16); });
  expect_error(ErrorCode::InvalidArgument, [&] { fit_zero_mean_legendre(Pattern("p", g), 0); });
  expect_error(ErrorCode::InvalidArgument, [&] { fit_zero_mean_legendre(Pattern("p", g), 2, 3); });
  expect_error(ErrorCode::DegenerateFit, [] { Pattern("flat", std::vector<double>(16, 3.0)); });
}

TEST(AdaptedWaveletTest, NormalizedZeroMeanAndScaleInvariant) {
  std::mt19937_64 rng(5);
  const auto g = random_pattern(rng, 256);
  auto scaled = g;
  for (double& v : scaled) v *= 42.5;
  const auto w1 = fit_adapted_wavelet(Pattern("a", g));
  const auto w2 = fit_adapted_wavelet(Pattern("b", scaled));
  ASSERT_EQ(w1.resolution(), kDefaultResolution);
  EXPECT_LE(std::abs(discrete_mean(w1.sampled())), 1e-8);
  EXPECT_NEAR(discrete_energy(w1.sampled()), 1.0, 1e-8);
  EXPECT_NEAR(w1.energy(), 1.0, 1e-8);
  for (std::size_t i = 0; i < w1.resolution(); ++i) {
    EXPECT_NEAR(w1.sampled()[i], w2.sampled()[i], 1e-9);
  }
}

TEST(AdaptedWaveletTest, InterpolationAndPeak) {
  AdaptedWavelet w("w", {}, {0.0, 1.0, -3.0, 0.0, 2.0});
  EXPECT_DOUBLE_EQ(w(0.0), 0.0);
  EXPECT_DOUBLE_EQ(w(0.125), 0.5);
  EXPECT_DOUBLE_EQ(w(1.0), 2.0);
  EXPECT_DOUBLE_EQ(w.t_peak(), 0.5);
  expect_error(ErrorCode::EmptyWavelet, [] { AdaptedWavelet("w", {}, {1.0}); });
  expect_error(ErrorCode::NonFiniteInput, [] { AdaptedWavelet("w", {}, {1.0, NAN}); });
}

TEST(Admissibility, FittedWaveletsAreAdmissible) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    const auto w = fit_adapted_wavelet(Pattern("r", random_pattern(rng, 100 + rng() % 200)),
                                       1 + static_cast<int>(rng() % 12));
    const auto r = check_admissibility(w);
    EXPECT_TRUE(r.admissible);
    EXPECT_NEAR(r.energy, 1.0, 1e-8);
    EXPECT_LE(r.mean_abs, 1e-8);
    EXPECT_TRUE(std::isfinite(r.c_g));
    EXPECT_GT(r.c_g, 0.0);
  }
}

TEST(Admissibility, HalfSineIsNotAdmissible) {
  std::vector<double> s(512);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::sin(std::numbers::pi * static_cast<double>(i) / 511.0);
  }
  const auto r = check_admissibility(s);
  EXPECT_FALSE(r.admissible);
  EXPECT_GT(r.mean_abs, 0.5);
  expect_error(ErrorCode::EmptyWavelet, [] { check_admissibility(std::span<const double>{}); });
}

TEST(Admissibility, MexicanHatCgMatchesQuadrature) {
  std::vector<double> s(1024);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = 10.0 * (static_cast<double>(i) / 1023.0 - 0.5);
    s[i] = (1.0 - u * u) * std::exp(-u * u / 2.0);
  }
  const double ref = oracle::mexican_hat_cg_quadrature();
  EXPECT_NEAR(ref, std::numbers::pi / 100.0, 1e-9);  // closed form
  const auto r = check_admissibility(s);
  EXPECT_NEAR(r.c_g, ref, 0.01 * ref);
}

TEST(Builtins, FivePatternsAllFitAndAdmissible) {
  const auto pats = builtin_qrs_patterns();
  ASSERT_EQ(pats.size(), 5u);
  for (const auto& p : pats) {
    EXPECT_EQ(p.size(), kBuiltinPatternSamples);
    double peak = 0.0;
    for (double v : p.samples()) {
      ASSERT_TRUE(std::isfinite(v));
      peak = std::max(peak, std::abs(v));
    }
    EXPECT_NEAR(peak, 1.0, 1e-12);
    EXPECT_TRUE(check_admissibility(fit_adapted_wavelet(p, 8)).admissible) << p.name();
  }
  const auto bank = builtin_wavelet_bank();
  ASSERT_EQ(bank.size(), 5u);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_EQ(bank[i].name(), "ADW" + std::to_string(i + 1));
    EXPECT_EQ(bank[i].degree(), kDefaultDegree);
    const auto r = check_admissibility(bank[i]);
    EXPECT_TRUE(r.admissible);
    // the bank also kills linear trends: first moment about the centre
    double m1 = 0.0;
    const auto s = bank[i].sampled();
    for (std::size_t j = 0; j < s.size(); ++j) {
      m1 += s[j] * (static_cast<double>(j) / static_cast<double>(s.size() - 1) - 0.5);
    }
    EXPECT_LT(std::abs(m1 / static_cast<double>(s.size() - 1)), 1e-3);
  }
}
