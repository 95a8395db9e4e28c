/*
 * Copyright 2026 The SDL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdl/errors.hpp"
#include "sdl/random.hpp"
#include "sdl/stats.hpp"

namespace sdl::stats {
namespace {

using testing::t_cdf_quadrature;

// Pooled t from a direct two-pass computation in long double.
double pooled_t(std::span<const double> a, std::span<const double> b) {
  auto moments = [](std::span<const double> x) {
    long double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    long double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss};
  };
  const auto [ma, ssa] = moments(a);
  const auto [mb, ssb] = moments(b);
  const long double n1 = a.size(), n2 = b.size();
  const long double sp2 = (ssa + ssb) / (n1 + n2 - 2);
  return static_cast<double>((ma - mb) / std::sqrt(sp2 * (1 / n1 + 1 / n2)));
}

TEST(TTest, IdenticalSamples) {
  const std::vector<double> a{1.5, 2.0, 4.25, 3.0};
  const TTestResult r = two_sample_t_test(a, a);
  EXPECT_EQ(r.t_statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.df, 6u);
}

TEST(TTest, DegreesOfFreedomFor25PerGroup) {
  Rng rng(1);
  std::vector<double> a(25), b(25);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal() + 0.5;
  EXPECT_EQ(two_sample_t_test(a, b).df, 48u);
}

TEST(TTest, MatchesQuadratureOracle) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  const TTestResult two = two_sample_t_test(a, b, Tails::two);
  EXPECT_NEAR(two.t_statistic, -1.0, 1e-12);
  EXPECT_EQ(two.df, 8u);
  const double cdf = t_cdf_quadrature(-1.0, 8.0);
  EXPECT_NEAR(two.p_value, 2.0 * cdf, 1e-6);
  const TTestResult one = two_sample_t_test(a, b, Tails::one);
  EXPECT_NEAR(one.p_value, 1.0 - cdf, 1e-6);
  EXPECT_EQ(one.t_statistic, two.t_statistic);
}

TEST(TTest, UnequalSizesMatchOracle) {
  const std::vector<double> a{2.1, 3.4, 1.9, 5.6, 4.4, 3.3}, b{6.2, 5.1, 7.7, 4.9};
  const TTestResult r = two_sample_t_test(a, b);
  const double t = pooled_t(a, b);
  EXPECT_NEAR(r.t_statistic, t, 1e-12 * std::abs(t));
  EXPECT_EQ(r.df, 8u);
  EXPECT_NEAR(r.p_value, 2.0 * t_cdf_quadrature(-std::abs(t), 8.0), 1e-6);
}

TEST(TCdf, MatchesQuadratureAcrossDf) {
  for (double df : {1.0, 2.0, 3.0, 5.0, 8.0, 30.0, 48.0}) {
    for (double t : {-6.0, -2.5, -1.0, -0.3, 0.4, 1.7, 3.2}) {
      EXPECT_NEAR(t_cdf(t, df), t_cdf_quadrature(t, df), 1e-9) << df << " " << t;
    }
  }
}

TEST(TCdf, ClosedFormsAndLimits) {
  for (double df : {1.0, 4.0, 48.0}) EXPECT_EQ(t_cdf(0.0, df), 0.5);
  EXPECT_NEAR(t_cdf(1.0, 1.0), 0.75, 1e-12);
  EXPECT_NEAR(t_cdf(1e6, 48.0), 1.0, 1e-9);
  EXPECT_NEAR(t_cdf(-1e6, 48.0), 0.0, 1e-9);
  // df = 2 closed form: 1/2 + t / (2 sqrt(t^2 + 2))
  EXPECT_NEAR(t_cdf(1.3, 2.0), 0.5 + 1.3 / (2 * std::sqrt(1.3 * 1.3 + 2)), 1e-12);
}

TEST(TCdf, SymmetricAndMonotone) {
  double prev = 0.0;
  for (double t = -8.0; t <= 8.0; t += 0.25) {
    const double c = t_cdf(t, 7.0);
    EXPECT_NEAR(t_cdf(-t, 7.0), 1.0 - c, 1e-12);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(TTest, PDecreasesWithMagnitude) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  double prev = 2.0;
  for (double shift : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    std::vector<double> b = a;
    for (double& v : b) v += shift + (v == 1.0 ? 0.1 : 0.0);
    const double p = two_sample_t_test(a, b).p_value;
    EXPECT_LT(p, prev);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}

TEST(TTest, ScaleShiftAntisymmetry) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(3 + rng.below(20)), b(3 + rng.below(20));
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal() + 0.3;
    const TTestResult r = two_sample_t_test(a, b);
    const double c = rng.uniform(0.1, 50.0), s = rng.uniform(-100.0, 100.0);
    std::vector<double> sa = a, sb = b, ha = a, hb = b;
    for (auto& v : sa) v *= c;
    for (auto& v : sb) v *= c;
    for (auto& v : ha) v += s;
    for (auto& v : hb) v += s;
    EXPECT_NEAR(two_sample_t_test(sa, sb).t_statistic, r.t_statistic, 1e-12 * std::abs(r.t_statistic) + 1e-15);
    EXPECT_NEAR(two_sample_t_test(ha, hb).t_statistic, r.t_statistic, 1e-9 * std::abs(r.t_statistic) + 1e-12);
    const TTestResult swapped = two_sample_t_test(b, a);
    EXPECT_EQ(swapped.t_statistic, -r.t_statistic);
    EXPECT_NEAR(swapped.p_value, r.p_value, 1e-14);
  }
}

TEST(TTest, Errors) {
  const std::vector<double> one{1.0}, two{1.0, 2.0}, flat{3.0, 3.0, 3.0};
  EXPECT_THROW(two_sample_t_test(one, two), SampleSizeError);
  EXPECT_THROW(two_sample_t_test(flat, flat), DegenerateError);
  EXPECT_THROW(parse_tails("three"), ConfigError);
  const std::vector<double> bad{1.0, NAN};
  EXPECT_ANY_THROW(two_sample_t_test(bad, two));
}

TEST(TTest, JsonFields) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  const auto j = two_sample_t_test(a, b).to_json();
  EXPECT_EQ(j["df"], 8);
  EXPECT_EQ(j["tails"], "two");
  EXPECT_DOUBLE_EQ(j["mean_a"].get<double>(), 3.0);
}

TEST(ReadSamples, ParsesLinesAndRejectsJunk) {
  testing::TempDir dir("samples");
  testing::write_text(dir / "a.txt", "1.5\n 2\n\n-3e2\n");
  EXPECT_EQ(read_samples(dir / "a.txt"), (std::vector<double>{1.5, 2.0, -300.0}));
  testing::write_text(dir / "b.txt", "1.0\nabc\n");
  EXPECT_ANY_THROW(read_samples(dir / "b.txt"));
  EXPECT_ANY_THROW(read_samples(dir / "missing.txt"));
}

TEST(IncompleteBeta, Endpoints) {
  EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
  // I_x(1, b) = 1 - (1 - x)^b
  EXPECT_NEAR(incomplete_beta(1.0, 3.0, 0.4), 1.0 - std::pow(0.6, 3), 1e-13);
}

}  // namespace
}  // namespace sdl::stats
