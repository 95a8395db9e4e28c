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

#include "sdl/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "sdl/errors.hpp"

namespace sdl {

namespace {

void require_image(const Tensor& image, const char* what) {
  if (image.rank() != 3 || image.dim(2) != 3) {
    throw ShapeError(std::string(what) + ": expected [H,W,3] image, got " + image.shape().to_string());
  }
}

// Parses one whitespace-delimited header token, skipping '#' comments.
std::size_t header_value(const std::string& bytes, std::size_t& pos, const std::string& file) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  std::size_t value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    if (value > 1'000'000) throw FormatError(file + ": PPM header value too large");
    ++pos;
  }
  if (pos == start) throw FormatError(file + ": malformed PPM header");
  return value;
}

float sample_clamped(const Tensor& img, double y, double x, std::size_t c) {
  const std::size_t h = img.dim(0), w = img.dim(1);
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const std::size_t y0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, h - 1);
  const std::size_t x1 = std::min(x0 + 1, w - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  const float* p = img.raw();
  auto at = [&](std::size_t yy, std::size_t xx) { return static_cast<double>(p[(yy * w + xx) * 3 + c]); };
  const double top = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
  const double bottom = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
  return static_cast<float>(top * (1.0 - fy) + bottom * fy);
}

}  // namespace

Tensor read_ppm(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + name);
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError(name + ": not a binary PPM (expected magic P6)");
  }
  std::size_t pos = 2;
  const std::size_t width = header_value(bytes, pos, name);
  const std::size_t height = header_value(bytes, pos, name);
  const std::size_t maxval = header_value(bytes, pos, name);
  if (width == 0 || height == 0) throw FormatError(name + ": zero image dimension");
  if (maxval != 255) throw FormatError(name + ": only maxval 255 is supported, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError(name + ": missing whitespace after PPM header");
  }
  ++pos;
  const std::size_t count = width * height * 3;
  if (bytes.size() - pos < count) throw FormatError(name + ": truncated pixel data");

  Tensor image(Shape{height, width, 3});
  for (std::size_t i = 0; i < count; ++i) image[i] = static_cast<unsigned char>(bytes[pos + i]);
  return image;
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  require_image(image, "write_ppm");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "P6\n" << image.dim(1) << ' ' << image.dim(0) << "\n255\n";
  std::string pixels(image.size(), '\0');
  for (std::size_t i = 0; i < image.size(); ++i) {
    pixels[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(image[i]), 0L, 255L)));
  }
  f.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  require_image(image, "resize_bilinear");
  if (out_h == 0 || out_w == 0) throw ShapeError("resize_bilinear: target size must be at least 1x1");
  const std::size_t in_h = image.dim(0), in_w = image.dim(1);
  if (in_h == out_h && in_w == out_w) return image;

  auto coord = [](std::size_t i, std::size_t in, std::size_t out) {
    if (out == 1) return static_cast<double>(in - 1) / 2.0;
    return static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
  };
  Tensor out(Shape{out_h, out_w, 3});
  for (std::size_t r = 0; r < out_h; ++r) {
    const double y = coord(r, in_h, out_h);
    for (std::size_t c = 0; c < out_w; ++c) {
      const double x = coord(c, in_w, out_w);
      for (std::size_t ch = 0; ch < 3; ++ch) out[(r * out_w + c) * 3 + ch] = sample_clamped(image, y, x, ch);
    }
  }
  return out;
}

Tensor normalize(const Tensor& image) {
  Tensor out(image.shape());
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float v = src[i];
    if (!(v >= 0.0f && v <= 255.0f)) {
      throw RangeError("normalize: pixel value " + std::to_string(v) + " outside [0, 255]");
    }
    dst[i] = v / 127.0f - 1.0f;
  }
  return out;
}

Tensor denormalize(const Tensor& normalized) {
  Tensor out(normalized.shape());
  const auto src = normalized.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>((static_cast<double>(src[i]) + 1.0) * 127.0);
  return out;
}

Tensor hflip(const Tensor& image) {
  require_image(image, "hflip");
  const std::size_t h = image.dim(0), w = image.dim(1);
  Tensor out(image.shape());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const float* src = image.raw() + (r * w + (w - 1 - c)) * 3;
      std::copy_n(src, 3, out.raw() + (r * w + c) * 3);
    }
  }
  return out;
}

void AugmentConfig::validate() const {
  if (!(rotation_deg >= 0.0)) throw ConfigError("rotation_deg must be non-negative");
  if (!(scale_min > 0.0 && scale_min <= scale_max)) throw ConfigError("scale range must satisfy 0 < min <= max");
  if (!(hflip_prob >= 0.0 && hflip_prob <= 1.0)) throw ConfigError("hflip_prob must lie in [0, 1]");
}

AugmentDraw draw_augment(const AugmentConfig& config, Rng& rng) {
  config.validate();
  AugmentDraw d;
  // All three draws are always consumed so the stream layout does not depend on the config.
  const double u_angle = rng.uniform();
  const double u_scale = rng.uniform();
  const double u_flip = rng.uniform();
  d.angle_deg = config.rotation_deg * (2.0 * u_angle - 1.0);
  d.scale = config.scale_min + (config.scale_max - config.scale_min) * u_scale;
  d.flip = u_flip < config.hflip_prob;
  return d;
}

Tensor apply_augment(const Tensor& image, const AugmentDraw& draw) {
  require_image(image, "augment");
  Tensor src = draw.flip ? hflip(image) : image;
  if (draw.angle_deg == 0.0 && draw.scale == 1.0) return src;

  const std::size_t h = src.dim(0), w = src.dim(1);
  const double cy = static_cast<double>(h - 1) / 2.0;
  const double cx = static_cast<double>(w - 1) / 2.0;
  const double theta = draw.angle_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double inv_scale = 1.0 / draw.scale;

  Tensor out(src.shape());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double dy = static_cast<double>(r) - cy;
      const double dx = static_cast<double>(c) - cx;
      // Inverse map: undo the zoom, then rotate back by theta.
      const double sx = cx + inv_scale * (cos_t * dx + sin_t * dy);
      const double sy = cy + inv_scale * (-sin_t * dx + cos_t * dy);
      for (std::size_t ch = 0; ch < 3; ++ch) out[(r * w + c) * 3 + ch] = sample_clamped(src, sy, sx, ch);
    }
  }
  return out;
}

}  // namespace sdl
