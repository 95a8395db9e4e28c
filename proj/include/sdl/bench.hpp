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
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdl/model.hpp"
#include "sdl/random.hpp"
#include "sdl/tensor.hpp"

namespace sdl::bench {

inline constexpr std::size_t kMinTimedFrames = 30;
inline constexpr std::size_t kDefaultWarmup = 10;

struct BenchReport {
  std::size_t frames = 0;  // timed frames, warmup excluded
  std::size_t warmup_frames = 0;
  double mean_latency_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double avg_fps = 0.0;  // 1000 / mean_latency_ms

  nlohmann::ordered_json to_json() const;
};

// Yields raw [H, W, 3] frames already at the model's input size.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<Tensor> next() = 0;
};

// Uniform integer noise, reproducible from the seed.
class SyntheticFrameSource final : public FrameSource {
 public:
  SyntheticFrameSource(std::size_t size, std::uint64_t seed) : size_(size), rng_(seed) {}
  std::optional<Tensor> next() override;

 private:
  std::size_t size_;
  Rng rng_;
};

// Every *.ppm below `root` (sorted, resized), repeated cyclically.
class DirectoryFrameSource final : public FrameSource {
 public:
  DirectoryFrameSource(const std::filesystem::path& root, std::size_t size);
  std::optional<Tensor> next() override;
  std::size_t frame_count() const { return frames_.size(); }

 private:
  std::vector<Tensor> frames_;
  std::size_t cursor_ = 0;
};

// Maps a normalized frame to a class index.
using Classifier = std::function<std::size_t(const Tensor& normalized_frame)>;

// Eval-mode forward plus argmax.
Classifier model_classifier(const Model& model);

// Spins on the steady clock for `ms` milliseconds, then returns class 0.
Classifier busy_wait_classifier(double ms);

// Times normalize -> classify for `warmup + frame_count` frames on a monotonic
// clock and reports only the last `frame_count`. Needs frame_count >= 30 and a
// non-empty source; otherwise BenchError.
BenchReport run_benchmark(const Classifier& classify, FrameSource& source, std::size_t frame_count,
                          std::size_t warmup = kDefaultWarmup);

// Nearest-rank percentiles over the given latencies.
BenchReport summarize(std::vector<double> latencies_ms, std::size_t warmup_frames);

}  // namespace sdl::bench
