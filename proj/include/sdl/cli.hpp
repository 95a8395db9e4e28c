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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdl/bench.hpp"
#include "sdl/image.hpp"
#include "sdl/model.hpp"
#include "sdl/stats.hpp"

namespace sdl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

struct ModelOptions {
  std::string variant = "mobilenetv2-224";
  double width_multiplier = 1.0;
  std::vector<std::size_t> head_hidden{128};

  ModelConfig to_config() const;
};

struct TrainOptions {
  std::string data;
  ModelOptions model;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
  bool augment = true;
  AugmentConfig augment_config;
  bool freeze_backbone = false;
  std::string init_weights;
  std::string out = "weights.sdlw";
  std::string log;  // defaults to <out>.log
};

struct EvalOptions {
  std::string weights;
  std::string data;
  ModelOptions model;
  std::uint64_t seed = 0;
  std::string out = "metrics.json";
};

struct PredictOptions {
  std::string weights;
  std::string image;
  ModelOptions model;
};

struct BenchOptions {
  std::string weights;  // random initialization from `seed` when empty
  std::string source = "synthetic";
  ModelOptions model;
  std::size_t frames = 100;
  std::size_t warmup = bench::kDefaultWarmup;
  std::uint64_t seed = 0;
  std::string out;  // stdout when empty
};

struct TTestOptions {
  std::string file_a;
  std::string file_b;
  std::string tails = "two";
  std::string out;  // stdout when empty
};

// Each command validates its options (ConfigError) before any side effect.
void cmd_train(const TrainOptions& options, std::ostream& out);
nlohmann::ordered_json cmd_eval(const EvalOptions& options, std::ostream& out);
Prediction cmd_predict(const PredictOptions& options, std::ostream& out);
bench::BenchReport cmd_bench(const BenchOptions& options, std::ostream& out);
stats::TTestResult cmd_ttest(const TTestOptions& options, std::ostream& out);

// The metrics document cmd_eval writes for a list of (actual, predicted) labels.
nlohmann::ordered_json eval_report_json(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                        std::uint64_t seed);

// Subcommands train | eval | predict | bench | ttest. `--config FILE` reads an
// INI file with one [section] per subcommand; flags override file values.
// Returns 0 on success, 1 on a domain error and 2 on a usage error.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sdl::cli
