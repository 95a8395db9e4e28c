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

#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdl::stats {

enum class Tails { one, two };

Tails parse_tails(std::string_view name);

struct TTestResult {
  double t_statistic = 0.0;
  unsigned df = 0;
  double p_value = 1.0;
  Tails tails = Tails::two;
  double mean_a = 0.0;
  double mean_b = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
// converged to 1e-12 relative.
double incomplete_beta(double a, double b, double x);

// Student t CDF: I_x(df/2, 1/2) / 2 with x = df / (df + t^2) gives the tail
// beyond |t|. Exactly 0.5 at t = 0.
double t_cdf(double t, double df);

// Pooled-variance Student test, df = n1 + n2 - 2. The one-tailed p-value is
// P(T >= t), i.e. the alternative mean(a) > mean(b).
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, Tails tails = Tails::two);

// One number per line; blank lines and '#' comments ignored.
std::vector<double> read_samples(const std::filesystem::path& path);

}  // namespace sdl::stats
