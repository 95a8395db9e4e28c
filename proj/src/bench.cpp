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

#include "sdl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sdl/errors.hpp"
#include "sdl/image.hpp"

namespace sdl::bench {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::optional<Tensor> SyntheticFrameSource::next() {
  Tensor frame(Shape{size_, size_, 3});
  for (float& v : frame.data()) v = static_cast<float>(rng_.below(256));
  return frame;
}

DirectoryFrameSource::DirectoryFrameSource(const fs::path& root, std::size_t size) {
  if (!fs::is_directory(root)) throw BenchError("frame directory " + root.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) frames_.push_back(resize_bilinear(read_ppm(f), size, size));
}

std::optional<Tensor> DirectoryFrameSource::next() {
  if (frames_.empty()) return std::nullopt;
  const Tensor& f = frames_[cursor_];
  cursor_ = (cursor_ + 1) % frames_.size();
  return f;
}

Classifier model_classifier(const Model& model) {
  return [&model](const Tensor& frame) {
    const Tensor batch = frame.reshaped(Shape{1, frame.dim(0), frame.dim(1), frame.dim(2)});
    const Tensor logits = model.forward(batch);
    return static_cast<std::size_t>(reduce(ReduceOp::argmax, logits, 1)[0]);
  };
}

Classifier busy_wait_classifier(double ms) {
  return [ms](const Tensor&) {
    const auto until = Clock::now() + std::chrono::duration<double, std::milli>(ms);
    while (Clock::now() < until) {
    }
    return std::size_t{0};
  };
}

BenchReport summarize(std::vector<double> latencies_ms, std::size_t warmup_frames) {
  if (latencies_ms.empty()) throw BenchError("no timed frames");
  if (latencies_ms.size() < kMinTimedFrames) {
    throw BenchError("need at least " + std::to_string(kMinTimedFrames) + " timed frames, got " +
                     std::to_string(latencies_ms.size()));
  }
  BenchReport r;
  r.frames = latencies_ms.size();
  r.warmup_frames = warmup_frames;
  r.mean_latency_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) / static_cast<double>(r.frames);
  std::sort(latencies_ms.begin(), latencies_ms.end());
  auto rank = [&](double pct) {
    const auto n = static_cast<double>(latencies_ms.size());
    const auto idx = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
    return latencies_ms[std::clamp<std::size_t>(idx, 1, latencies_ms.size()) - 1];
  };
  r.p50_ms = rank(50.0);
  r.p95_ms = rank(95.0);
  r.p99_ms = rank(99.0);
  if (!(r.mean_latency_ms > 0.0)) throw BenchError("mean latency is not positive; clock too coarse");
  r.avg_fps = 1000.0 / r.mean_latency_ms;
  return r;
}

BenchReport run_benchmark(const Classifier& classify, FrameSource& source, std::size_t frame_count,
                          std::size_t warmup) {
  if (frame_count < kMinTimedFrames) {
    throw BenchError("benchmark needs at least " + std::to_string(kMinTimedFrames) + " timed frames, got " +
                     std::to_string(frame_count));
  }
  std::vector<double> latencies;
  latencies.reserve(frame_count);
  for (std::size_t i = 0; i < warmup + frame_count; ++i) {
    std::optional<Tensor> frame = source.next();
    if (!frame) {
      throw BenchError("frame source ran dry after " + std::to_string(i) + " frames (" +
                       std::to_string(i < warmup ? 0 : i - warmup) + " timed)");
    }
    const auto start = Clock::now();
    const Tensor input = normalize(*frame);
    volatile std::size_t cls = classify(input);
    (void)cls;
    const auto stop = Clock::now();
    if (i >= warmup) latencies.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return summarize(std::move(latencies), warmup);
}

nlohmann::ordered_json BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["frames"] = frames;
  j["warmup_frames"] = warmup_frames;
  j["mean_latency_ms"] = mean_latency_ms;
  j["p50_ms"] = p50_ms;
  j["p95_ms"] = p95_ms;
  j["p99_ms"] = p99_ms;
  j["avg_fps"] = avg_fps;
  return j;
}

}  // namespace sdl::bench
