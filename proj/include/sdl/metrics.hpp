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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdl {

// Rows are the actual class, columns the predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::size_t num_classes, std::vector<std::string> class_names);

  std::size_t num_classes() const { return k_; }
  const std::vector<std::string>& class_names() const { return names_; }

  std::uint64_t at(std::size_t actual, std::size_t predicted) const { return counts_[actual * k_ + predicted]; }
  void add(std::size_t actual, std::size_t predicted);

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t actual) const;
  std::uint64_t col_sum(std::size_t predicted) const;

 private:
  std::size_t k_;
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
};

// Names default to "class0", "class1", ... when `class_names` is empty.
ConfusionMatrix confusion_from_predictions(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                           std::size_t num_classes, std::vector<std::string> class_names = {});

struct ClassMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t support = 0;
  // Names of metrics whose denominator was zero; those are reported as 0.
  std::vector<std::string> undefined;
};

// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);

// One-vs-rest reduction of class `c`, then
// ACC = (TP+TN)/(TP+TN+FP+FN), P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R).
ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t c);

struct MetricsReport {
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> classes;
  ClassMetrics macro;  // unweighted means of the per-class metrics; counts unused
  double micro_accuracy = 0.0;
  ConfusionMatrix confusion;

  // {"classes":[{"name","accuracy","precision","recall","f1","support","undefined"}...],
  //  "macro":{"accuracy","precision","recall","f1"}, "micro_accuracy", "confusion"}
  nlohmann::ordered_json to_json() const;
};

MetricsReport report(const ConfusionMatrix& cm);

}  // namespace sdl
