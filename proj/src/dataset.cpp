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

#include "sdl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sdl/errors.hpp"
#include "sdl/random.hpp"

namespace sdl {

namespace fs = std::filesystem;

Dataset load_dataset(const fs::path& root, std::optional<std::size_t> resize_to) {
  Dataset ds;
  ds.class_counts.assign(kNumClasses, 0);
  for (std::size_t label = 0; label < kNumClasses; ++label) {
    const fs::path dir = root / kClassDirs[label];
    if (!fs::is_directory(dir)) {
      throw DatasetError("missing class directory " + dir.string() + " (class " + std::string(kClassNames[label]) +
                         ")");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      if (file.extension() != ".ppm") {
        ds.warnings.push_back({file, "skipped non-PPM file"});
        continue;
      }
      try {
        Tensor image = read_ppm(file);
        if (resize_to) image = resize_bilinear(image, *resize_to, *resize_to);
        ds.samples.push_back({std::move(image), label, file.string()});
        ++ds.class_counts[label];
      } catch (const FormatError& e) {
        ds.errors.push_back({file, e.what()});
      }
    }
    if (ds.class_counts[label] == 0) {
      throw DatasetError("class " + std::string(kClassNames[label]) + " has no readable images in " + dir.string());
    }
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& root) {
  std::vector<std::size_t> next(kNumClasses, 0);
  for (const auto& dir : kClassDirs) fs::create_directories(root / dir);
  for (const auto& s : dataset.samples) {
    if (s.label >= kNumClasses) throw RangeError("sample label " + std::to_string(s.label) + " out of range");
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.ppm", next[s.label]++);
    write_ppm(root / kClassDirs[s.label] / name, s.image);
  }
}

Tensor one_hot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes) {
    throw RangeError("label " + std::to_string(label) + " out of range for " + std::to_string(num_classes) +
                     " classes");
  }
  Tensor t(Shape{num_classes});
  t[label] = 1.0f;
  return t;
}

void SplitConfig::validate() const {
  const double fracs[] = {train_fraction, val_fraction, test_fraction};
  for (double f : fracs) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

Split stratified_split(const Dataset& dataset, const SplitConfig& config) {
  config.validate();
  Split split;
  for (std::size_t label = 0; label < kNumClasses; ++label) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.samples[i].label == label) members.push_back(i);
    }
    Rng rng(derive_seed({config.seed, 0x5b1170ULL, label}));
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);

    const double n = static_cast<double>(members.size());
    std::size_t n_val = static_cast<std::size_t>(std::lround(config.val_fraction * n));
    std::size_t n_test = static_cast<std::size_t>(std::lround(config.test_fraction * n));
    n_val = std::min(n_val, members.size());
    n_test = std::min(n_test, members.size() - n_val);
    auto it = members.begin();
    split.val.insert(split.val.end(), it, it + static_cast<std::ptrdiff_t>(n_val));
    it += static_cast<std::ptrdiff_t>(n_val);
    split.test.insert(split.test.end(), it, it + static_cast<std::ptrdiff_t>(n_test));
    it += static_cast<std::ptrdiff_t>(n_test);
    split.train.insert(split.train.end(), it, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> all_indices(const Dataset& dataset) {
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

BatchIterator::BatchIterator(const Dataset& dataset, std::vector<std::size_t> indices, BatchOptions options,
                             std::uint64_t epoch)
    : dataset_(&dataset), order_(std::move(indices)), options_(std::move(options)), epoch_(epoch) {
  if (options_.batch_size == 0) throw ConfigError("batch size must be positive");
  if (options_.augment) options_.augment->validate();
  for (std::size_t i : order_) {
    if (i >= dataset.size()) throw RangeError("sample index " + std::to_string(i) + " out of range");
  }
  if (options_.shuffle) {
    Rng rng(derive_seed({options_.seed, epoch_, 0x5ff1eULL}));
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
  }
}

std::size_t BatchIterator::batch_count() const {
  return (order_.size() + options_.batch_size - 1) / options_.batch_size;
}

std::optional<Batch> BatchIterator::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t n = std::min(options_.batch_size, order_.size() - cursor_);
  const Shape& first = dataset_->samples[order_[cursor_]].image.shape();
  if (first.rank() != 3 || first[2] != 3) throw ShapeError("dataset image " + first.to_string() + " is not [H,W,3]");
  const std::size_t h = first[0], w = first[1], k = options_.num_classes;
  const std::size_t pixels = h * w * 3;

  Batch batch{Tensor(Shape{n, h, w, 3}), Tensor(Shape{n, k}), {}};
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t idx = order_[cursor_ + b];
    const Sample& s = dataset_->samples[idx];
    if (s.image.shape() != first) {
      throw ShapeError("batch mixes image shapes " + first.to_string() + " and " + s.image.shape().to_string());
    }
    Tensor img = s.image;
    if (options_.augment) {
      Rng rng(derive_seed({options_.augment->seed, epoch_, idx}));
      img = augment(img, *options_.augment, rng);
    }
    const Tensor norm = normalize(img);
    std::copy(norm.data().begin(), norm.data().end(), batch.images.raw() + b * pixels);
    const Tensor label = one_hot(s.label, k);
    std::copy(label.data().begin(), label.data().end(), batch.labels.raw() + b * k);
    batch.indices.push_back(idx);
  }
  cursor_ += n;
  return batch;
}

namespace {

double clamp255(double v) { return std::clamp(std::round(v), 0.0, 255.0); }

}  // namespace

Tensor synthetic_image(std::size_t label, std::size_t size, Rng& rng) {
  if (label >= kNumClasses) throw RangeError("synthetic label " + std::to_string(label) + " out of range");
  Tensor img(Shape{size, size, 3});
  const double s = static_cast<double>(size);

  // Backdrop: a soft linear gradient.
  double base[3];
  double slope[3];
  if (label == 0) {
    base[0] = 170; base[1] = 170; base[2] = 160;
  } else if (label == 1) {
    base[0] = 60; base[1] = 60; base[2] = 80;
  } else {
    base[0] = rng.uniform(60, 180); base[1] = rng.uniform(80, 180); base[2] = rng.uniform(60, 160);
  }
  for (double& v : base) v += rng.uniform(-15, 15);
  for (double& v : slope) v = rng.uniform(-40, 40);

  const bool face = label != 2;
  const double cy = s * (0.5 + rng.uniform(-0.1, 0.1));
  const double cx = s * (0.5 + rng.uniform(-0.1, 0.1));
  const double ry = s * rng.uniform(0.28, 0.36);
  const double rx = ry * rng.uniform(0.7, 0.85);
  const double skin[2][3] = {{225, 170, 120}, {120, 150, 215}};
  const double stripes = rng.uniform(2.0, 5.0);

  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double y = static_cast<double>(r), x = static_cast<double>(c);
      double px[3];
      for (int ch = 0; ch < 3; ++ch) px[ch] = base[ch] + slope[ch] * (x / s - 0.5);
      if (label == 2) {
        const double tex = 25.0 * std::sin(stripes * 6.283185307179586 * (x + 0.5 * y) / s);
        for (double& v : px) v += tex;
      }
      if (face) {
        const double ny = (y - cy) / ry, nx = (x - cx) / rx;
        if (ny * ny + nx * nx <= 1.0) {
          for (int ch = 0; ch < 3; ++ch) px[ch] = skin[label][ch];
          // Dark band across the upper third of the ellipse.
          if (ny > -0.45 && ny < -0.15) {
            for (double& v : px) v *= 0.35;
          }
        }
      }
      for (int ch = 0; ch < 3; ++ch) img[(r * size + c) * 3 + ch] = static_cast<float>(clamp255(px[ch] + rng.uniform(-12, 12)));
    }
  }
  return img;
}

Dataset synthetic_dataset(std::size_t per_class, std::size_t size, std::uint64_t seed) {
  Dataset ds;
  ds.class_counts.assign(kNumClasses, per_class);
  for (std::size_t label = 0; label < kNumClasses; ++label) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(derive_seed({seed, label, i}));
      ds.samples.push_back({synthetic_image(label, size, rng), label,
                            "synthetic/" + std::string(kClassDirs[label]) + "/" + std::to_string(i)});
    }
  }
  return ds;
}

}  // namespace sdl
