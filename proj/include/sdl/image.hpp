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

#include "sdl/random.hpp"
#include "sdl/tensor.hpp"

namespace sdl {

// Images are [H, W, 3] tensors holding raw intensities in [0, 255] until
// normalize() is applied.

// Binary PPM (P6) with maxval 255 only. Throws FormatError otherwise.
Tensor read_ppm(const std::filesystem::path& path);
// Rounds to the nearest integer and clamps to [0, 255].
void write_ppm(const std::filesystem::path& path, const Tensor& image);

// Corner-aligned bilinear: output pixel i samples source coordinate
// i * (in - 1) / (out - 1); a one-pixel output axis samples the source center.
Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w);

// X / 127 - 1, element by element in float32. Note 255 maps to 128/127 - 1.
Tensor normalize(const Tensor& image);
Tensor denormalize(const Tensor& normalized);

Tensor hflip(const Tensor& image);

struct AugmentConfig {
  double rotation_deg = 15.0;
  double scale_min = 0.9;
  double scale_max = 1.1;
  double hflip_prob = 0.5;
  std::uint64_t seed = 0;

  static AugmentConfig identity() { return {0.0, 1.0, 1.0, 0.0, 0}; }
  void validate() const;
};

struct AugmentDraw {
  double angle_deg = 0.0;
  double scale = 1.0;
  bool flip = false;
};

AugmentDraw draw_augment(const AugmentConfig& config, Rng& rng);

// Optional horizontal flip, then rotation about the center and zoom about the
// center, resampled bilinearly with edge-pixel padding; dimensions unchanged.
Tensor apply_augment(const Tensor& image, const AugmentDraw& draw);

inline Tensor augment(const Tensor& image, const AugmentConfig& config, Rng& rng) {
  return apply_augment(image, draw_augment(config, rng));
}

}  // namespace sdl
