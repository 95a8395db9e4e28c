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

#include "sdl/stats.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "sdl/errors.hpp"

namespace sdl::stats {

namespace {

constexpr double kTolerance = 1e-12;
constexpr int kMaxIterations = 10000;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), modified Lentz.
double beta_fraction(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTolerance) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

// I_x(a, b) with y = 1 - x supplied separately to avoid cancellation.
double incomplete_beta_xy(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, y) / b;
}

// P(|T| >= |t|).
double two_sided_tail(double t, double df) {
  if (t == 0.0) return 1.0;
  const double t2 = t * t;
  return incomplete_beta_xy(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2));
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

Tails parse_tails(std::string_view name) {
  if (name == "one") return Tails::one;
  if (name == "two") return Tails::two;
  throw ConfigError("tails must be 'one' or 'two', got '" + std::string(name) + "'");
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw RangeError("incomplete beta needs a > 0 and b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw RangeError("incomplete beta needs x in [0, 1]");
  return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw RangeError("t distribution needs positive degrees of freedom");
  if (std::isnan(t)) throw NumericError("t_cdf of NaN");
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * two_sided_tail(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, Tails tails) {
  if (a.size() < 2 || b.size() < 2) {
    throw SampleSizeError("two-sample t-test needs at least 2 values per sample, got " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  }
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n1;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n2;
  const double dof = n1 + n2 - 2.0;
  const double pooled = ((n1 - 1.0) * sample_variance(a, mean_a) + (n2 - 1.0) * sample_variance(b, mean_b)) / dof;
  if (!(pooled > 0.0)) {
    throw DegenerateError(mean_a == mean_b ? "both samples are constant and equal; t is undefined"
                                           : "pooled variance is zero; t is infinite");
  }

  TTestResult r;
  r.tails = tails;
  r.df = static_cast<unsigned>(a.size() + b.size() - 2);
  r.mean_a = mean_a;
  r.mean_b = mean_b;
  r.t_statistic = (mean_a - mean_b) / (std::sqrt(pooled) * std::sqrt(1.0 / n1 + 1.0 / n2));
  if (!std::isfinite(r.t_statistic)) throw NumericError("t statistic is not finite");
  const double two = two_sided_tail(r.t_statistic, dof);
  double p = two;
  if (tails == Tails::one) p = r.t_statistic >= 0.0 ? 0.5 * two : 1.0 - 0.5 * two;
  r.p_value = std::max(p, std::numeric_limits<double>::min());
  return r;
}

nlohmann::ordered_json TTestResult::to_json() const {
  nlohmann::ordered_json j;
  j["t_statistic"] = t_statistic;
  j["df"] = df;
  j["p_value"] = p_value;
  j["tails"] = tails == Tails::one ? "one" : "two";
  j["mean_a"] = mean_a;
  j["mean_b"] = mean_b;
  return j;
}

std::vector<double> read_samples(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open sample file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + token + "'");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace sdl::stats
