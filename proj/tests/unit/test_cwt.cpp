#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qrsadapt/cwt.hpp"
#include "test_util.hpp"

using namespace qrsadapt;

namespace {

AdaptedWavelet ricker(std::size_t m = 1024) {
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = 10.0 * (static_cast<double>(i) / static_cast<double>(m - 1) - 0.5);
    s[i] = (1.0 - u * u) * std::exp(-u * u / 2.0);
  }
  return AdaptedWavelet("ricker", {}, std::move(s));
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(EcgSignalTest, Validation) {
  expect_error(ErrorCode::TooFewSamples, [] { EcgSignal({1.0}, 360); });
  expect_error(ErrorCode::NonFiniteInput, [] { EcgSignal({1.0, NAN, 2.0}, 360); });
  expect_error(ErrorCode::InvalidArgument, [] { EcgSignal({1.0, 2.0}, 0.0); });
  EcgSignal s({1, 2, 3, 4}, 100, "r");
  const auto p = s.prefix(2);
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p.record_id(), "r");
}

TEST(ScaleGridTest, Construction) {
  const auto g = ScaleGrid::default_grid();
  EXPECT_EQ(g.size(), 16u);
  EXPECT_NEAR(g[0], 0.04, 1e-15);
  EXPECT_NEAR(g.max_scale(), 0.12, 1e-15);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
  expect_error(ErrorCode::InvalidArgument, [] { ScaleGrid({0.1, 0.05}); });
  expect_error(ErrorCode::InvalidArgument, [] { ScaleGrid({-0.1}); });
  expect_error(ErrorCode::InvalidArgument, [] { ScaleGrid(std::vector<double>{}); });
  expect_error(ErrorCode::ScaleTooSmall, [] { ScaleGrid({0.005, 0.1}).validate_for(360); });
  EXPECT_EQ(kernel_length(0.1, 360), 36u);
}

TEST(Cwt, MatchesNaiveDoubleLoop) {
  const auto w = ricker();
  const std::vector<double> scales{0.02, 0.05, 0.11, 0.3};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = noise(700 + 97 * seed, seed);
    const auto m = cwt(EcgSignal(x, 360), w, ScaleGrid(scales), 1);
    const auto ref = oracle::naive_cwt(x, 360, w, scales);
    for (std::size_t r = 0; r < scales.size(); ++r) {
      double peak = 0.0;
      for (double v : ref[r]) peak = std::max(peak, std::abs(v));
      for (std::size_t c = 0; c < x.size(); ++c) {
        ASSERT_NEAR(m.at(r, c), ref[r][c], 1e-10 * peak) << r << "," << c;
      }
    }
  }
}

TEST(Cwt, ZeroSignalAndImpulse) {
  const auto w = ricker();
  const auto grid = ScaleGrid({0.05, 0.1});
  EXPECT_EQ(cwt(EcgSignal(std::vector<double>(400, 0.0), 360), w, grid).max_abs(), 0.0);

  // unit impulse at n0: W(a, b) = psi((n0-b)/(L-1)) / (fs sqrt(a))
  std::vector<double> x(400, 0.0);
  x[200] = 1.0;
  const auto m = cwt(EcgSignal(x, 360), w, grid, 1);
  const auto k = sample_wavelet_at_scale(w, 0.1, 360);
  for (std::size_t j = 0; j < k.size(); ++j) {
    EXPECT_NEAR(m.at(1, 200 - j), k[j] / 360.0 / std::sqrt(0.1), 1e-15);
  }
}

TEST(Cwt, LinearInSignal) {
  const auto w = ricker();
  const auto grid = ScaleGrid({0.04, 0.09});
  const auto a = noise(500, 1), b = noise(500, 2);
  std::vector<double> c(500);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * a[i] - 0.5 * b[i];
  const auto ma = cwt(EcgSignal(a, 250), w, grid), mb = cwt(EcgSignal(b, 250), w, grid),
             mc = cwt(EcgSignal(c, 250), w, grid);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t i = 0; i < 500; ++i) {
      EXPECT_NEAR(mc.at(r, i), 2.0 * ma.at(r, i) - 0.5 * mb.at(r, i), 1e-12);
    }
  }
}

TEST(Cwt, ThreadCountDoesNotChangeBits) {
  const auto w = ricker();
  const auto x = noise(3000, 4);
  const auto grid = ScaleGrid::log_spaced(0.03, 0.3, 23);
  const auto m1 = cwt(EcgSignal(x, 360), w, grid, 1);
  for (unsigned t : {2u, 4u, 7u}) {
    const auto mt = cwt(EcgSignal(x, 360), w, grid, t);
    for (std::size_t r = 0; r < grid.size(); ++r) {
      for (std::size_t c = 0; c < x.size(); ++c) ASSERT_EQ(m1.at(r, c), mt.at(r, c));
    }
  }
}

TEST(Cwt, ThreadEnvironmentVariable) {
  ::setenv("QRSADAPT_THREADS", "3", 1);
  EXPECT_EQ(resolve_thread_count(0), 3u);
  EXPECT_EQ(resolve_thread_count(5), 5u);
  ::setenv("QRSADAPT_THREADS", "junk", 1);
  EXPECT_EQ(resolve_thread_count(0), 1u);
  ::unsetenv("QRSADAPT_THREADS");
  EXPECT_EQ(resolve_thread_count(0), 1u);
}

TEST(Maxima, StrictInteriorAboveThreshold) {
  CwtMatrix m(ScaleGrid({0.1}), 100, 8);
  const double row[] = {5.0, 1.0, 3.0, 1.0, -4.0, 2.0, 2.0, 9.0};
  for (std::size_t i = 0; i < 8; ++i) m.row(0)[i] = row[i];
  const auto peaks = find_coefficient_maxima(m, 0.0);
  // 0 and 7 are boundary columns; 5/6 is a plateau
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_EQ(peaks[0].sample_b, 2u);
  EXPECT_EQ(peaks[1].sample_b, 4u);
  EXPECT_EQ(peaks[1].value, -4.0);
  EXPECT_EQ(peaks[1].magnitude, 4.0);
  EXPECT_EQ(find_coefficient_maxima(m, 3.5).size(), 1u);
  expect_error(ErrorCode::InvalidArgument, [&] { find_coefficient_maxima(m, -1.0); });
}
