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

#include "sdl/metrics.hpp"

#include <numeric>

#include "sdl/errors.hpp"

namespace sdl {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes, std::vector<std::string> class_names)
    : k_(num_classes), names_(std::move(class_names)), counts_(num_classes * num_classes, 0) {
  if (k_ == 0) throw ConfigError("confusion matrix needs at least one class");
  if (names_.empty()) {
    for (std::size_t i = 0; i < k_; ++i) names_.push_back("class" + std::to_string(i));
  }
  if (names_.size() != k_) throw ConfigError("confusion matrix: class name count does not match class count");
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted) {
  if (actual >= k_ || predicted >= k_) {
    throw RangeError("label pair (" + std::to_string(actual) + ", " + std::to_string(predicted) +
                     ") out of range for " + std::to_string(k_) + " classes");
  }
  ++counts_[actual * k_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += at(i, i);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t actual) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += at(actual, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, predicted);
  return s;
}

ConfusionMatrix confusion_from_predictions(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                           std::size_t num_classes, std::vector<std::string> class_names) {
  if (actual.size() != predicted.size()) {
    throw ShapeError("confusion matrix: " + std::to_string(actual.size()) + " actual labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm(num_classes, std::move(class_names));
  for (std::size_t i = 0; i < actual.size(); ++i) cm.add(actual[i], predicted[i]);
  return cm;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t c) {
  if (c >= cm.num_classes()) throw RangeError("class index " + std::to_string(c) + " out of range");
  ClassMetrics m;
  const std::uint64_t total = cm.total();
  m.tp = cm.at(c, c);
  m.fp = cm.col_sum(c) - m.tp;
  m.fn = cm.row_sum(c) - m.tp;
  m.tn = total - m.tp - m.fp - m.fn;
  m.support = cm.row_sum(c);

  auto ratio = [&m](std::uint64_t num, std::uint64_t den, const char* name) {
    if (den == 0) {
      m.undefined.emplace_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(m.tp + m.tn, total, "accuracy");
  m.precision = ratio(m.tp, m.tp + m.fp, "precision");
  m.recall = ratio(m.tp, m.tp + m.fn, "recall");
  if (m.precision + m.recall > 0.0) {
    m.f1 = f1_score(m.precision, m.recall);
  } else {
    m.undefined.emplace_back("f1");
  }
  return m;
}

MetricsReport report(const ConfusionMatrix& cm) {
  MetricsReport r{cm.class_names(), {}, {}, 0.0, cm};
  const std::size_t k = cm.num_classes();
  for (std::size_t c = 0; c < k; ++c) {
    r.classes.push_back(class_metrics(cm, c));
    const auto& m = r.classes.back();
    r.macro.accuracy += m.accuracy;
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
  }
  const double kd = static_cast<double>(k);
  r.macro.accuracy /= kd;
  r.macro.precision /= kd;
  r.macro.recall /= kd;
  r.macro.f1 /= kd;
  const std::uint64_t total = cm.total();
  r.micro_accuracy = total ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
  return r;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["classes"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& m = classes[c];
    nlohmann::ordered_json row;
    row["name"] = class_names[c];
    row["accuracy"] = m.accuracy;
    row["precision"] = m.precision;
    row["recall"] = m.recall;
    row["f1"] = m.f1;
    row["support"] = m.support;
    row["undefined"] = m.undefined;
    j["classes"].push_back(std::move(row));
  }
  j["macro"] = {{"accuracy", macro.accuracy}, {"precision", macro.precision}, {"recall", macro.recall},
                {"f1", macro.f1}};
  j["micro_accuracy"] = micro_accuracy;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < confusion.num_classes(); ++a) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < confusion.num_classes(); ++p) row.push_back(confusion.at(a, p));
    rows.push_back(std::move(row));
  }
  j["confusion"] = std::move(rows);
  return j;
}

}  // namespace sdl
