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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdl/image.hpp"
#include "sdl/tensor.hpp"

namespace sdl {

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{"Admin", "Intruder", "No Human"};
inline constexpr std::array<std::string_view, kNumClasses> kClassDirs{"admin", "intruder", "no_human"};

struct Sample {
  Tensor image;  // [H, W, 3], raw intensities
  std::size_t label = 0;
  std::string source;
};

struct FileIssue {
  std::filesystem::path path;
  std::string message;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::size_t> class_counts;
  // Skipped non-image files.
  std::vector<FileIssue> warnings;
  // Image files that failed to decode.
  std::vector<FileIssue> errors;

  std::size_t size() const { return samples.size(); }
};

// Reads root/{admin,intruder,no_human}/*.ppm in file-name order, optionally
// resizing every image to `resize_to` x `resize_to`. A missing class
// directory, or one without a single decodable image, is a DatasetError.
Dataset load_dataset(const std::filesystem::path& root, std::optional<std::size_t> resize_to = std::nullopt);

// Writes the dataset directory layout, one zero-padded PPM per sample.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

Tensor one_hot(std::size_t label, std::size_t num_classes);

struct SplitConfig {
  double train_fraction = 0.8;
  double val_fraction = 0.2;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Per class: shuffle, then round(val * n) to val and round(test * n) to test;
// the remainder trains. Index lists come back sorted.
Split stratified_split(const Dataset& dataset, const SplitConfig& config);

struct Batch {
  Tensor images;  // [N, H, W, 3], normalized
  Tensor labels;  // [N, K] one-hot
  std::vector<std::size_t> indices;
};

struct BatchOptions {
  std::size_t batch_size = 16;
  std::size_t num_classes = kNumClasses;
  bool shuffle = true;
  std::uint64_t seed = 0;
  // Applied per sample before normalization; the stream for sample i in epoch
  // e is seeded by (augment->seed, e, i).
  std::optional<AugmentConfig> augment;
};

// One epoch over `indices`. Shuffling is a Fisher-Yates permutation seeded by
// (seed, epoch); the last batch may be short.
class BatchIterator {
 public:
  BatchIterator(const Dataset& dataset, std::vector<std::size_t> indices, BatchOptions options, std::uint64_t epoch);

  std::optional<Batch> next();
  std::size_t batch_count() const;
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const Dataset* dataset_;
  std::vector<std::size_t> order_;
  BatchOptions options_;
  std::uint64_t epoch_;
  std::size_t cursor_ = 0;
};

std::vector<std::size_t> all_indices(const Dataset& dataset);

// Seeded pseudo-scenes for tests and demos: Admin is a warm face-like ellipse
// on a light backdrop, Intruder a cool ellipse on a dark backdrop, No Human a
// textured gradient with no ellipse. Integer intensities in [0, 255].
Tensor synthetic_image(std::size_t label, std::size_t size, Rng& rng);
Dataset synthetic_dataset(std::size_t per_class, std::size_t size, std::uint64_t seed);

}  // namespace sdl
