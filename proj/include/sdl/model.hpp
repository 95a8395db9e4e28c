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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdl/nn.hpp"
#include "sdl/tensor.hpp"

namespace sdl {

enum class Variant { mobilenetv2_224, micronet_32 };

// Accepts "mobilenetv2-224" and "micronet-32"; anything else is a ConfigError.
Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant variant);

// One row of the inverted-residual table: `repeat` blocks, the first with
// `stride`, the rest with stride 1.
struct InvertedResidualSpec {
  std::size_t expansion = 1;
  std::size_t out_channels = 1;
  std::size_t stride = 1;
  std::size_t repeat = 1;
};

struct ModelConfig {
  Variant variant = Variant::mobilenetv2_224;
  std::size_t num_classes = 3;
  double width_multiplier = 1.0;
  // Hidden dense widths of the classifier head (ReLU); the logits layer follows.
  std::vector<std::size_t> head_hidden{128};

  void validate() const;
  std::size_t input_size() const;
};

struct BackboneTable {
  std::size_t stem_channels = 0;
  std::vector<InvertedResidualSpec> stages;
  std::size_t last_channels = 0;
};

std::size_t make_divisible(double channels, std::size_t divisor = 8);

// Backbone layout with channel counts already scaled by the width multiplier.
//
// mobilenetv2-224: 3x3/2 stem (32), then (t, c, n, s)
//   (1,16,1,1) (6,24,2,2) (6,32,3,2) (6,64,4,2) (6,96,3,1) (6,160,3,2) (6,320,1,1),
//   then a 1x1 conv to 1280.
// micronet-32: 3x3/2 stem (16), then (1,8,1,1) (4,16,2,2) (4,24,2,2), then a
//   1x1 conv to 64.
// Every conv is bias-free and followed by batch norm; ReLU6 everywhere except
// the linear 1x1 projection that closes each block.
BackboneTable backbone_table(const ModelConfig& config);

enum class ParamKind { trainable, buffer };

struct Parameter {
  std::string name;
  Tensor value;
  ParamKind kind = ParamKind::trainable;
  bool head = false;
  bool frozen = false;

  bool updatable() const { return kind == ParamKind::trainable && !frozen; }
};

// Saved activations from a training forward pass plus the running-statistics
// updates that batch norm computed along the way.
struct Tape {
  struct Entry {
    std::vector<Tensor> tensors;
    std::vector<float> inv_std;
    nn::Mode mode = nn::Mode::eval;
  };
  std::vector<Entry> entries;
  std::vector<std::pair<std::size_t, Tensor>> running_updates;
  Shape pooled_input;
};

namespace detail {
class Layer;
}

class Model {
 public:
  const ModelConfig& config() const { return config_; }

  std::span<const Parameter> parameters() const { return params_; }
  std::span<Parameter> parameters() { return params_; }
  const Parameter& parameter(std::string_view name) const;
  Parameter& parameter(std::string_view name);

  // Number of trainable scalars (buffers excluded).
  std::size_t trainable_count() const;
  bool backbone_frozen() const { return backbone_frozen_; }

  // Eval-mode logits [N, num_classes]. Does not mutate the model.
  Tensor forward(const Tensor& images) const;

  // Train-mode logits; batch norm layers of a frozen backbone stay in eval mode.
  Tensor forward_train(const Tensor& images, Tape& tape) const;

  // Gradients aligned with parameters(); entries that received no gradient
  // (buffers, frozen backbone) are zero.
  std::vector<Tensor> backward(Tape& tape, const Tensor& d_logits) const;

  void commit_running_stats(const Tape& tape);

 private:
  friend Model build_model(const ModelConfig& config, std::uint64_t seed);
  friend void freeze_backbone(Model& model, bool frozen);

  Tensor run(const Tensor& images, nn::Mode mode, Tape* tape) const;
  void check_input(const Tensor& images) const;

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<std::shared_ptr<const detail::Layer>> backbone_;
  std::vector<std::shared_ptr<const detail::Layer>> head_;
  bool backbone_frozen_ = false;
};

// Weights use He fan-in normal initialization drawn from `seed`.
Model build_model(const ModelConfig& config, std::uint64_t seed = 0);

void freeze_backbone(Model& model, bool frozen);

// SDLW: "SDLW", u32 version, then for every parameter in model order:
// u32 name length, name bytes, u32 rank, u32 dims, float32 values. All
// integers and floats little-endian.
inline constexpr std::uint32_t kWeightsVersion = 1;

void save_weights(const Model& model, const std::filesystem::path& path);
// Validates the whole file before touching `model`.
void load_weights(const std::filesystem::path& path, Model& model);

struct Prediction {
  std::size_t class_index = 0;
  std::vector<float> probabilities;
};

// `image` is a normalized [H,W,3] or [1,H,W,3] tensor at the model's input size.
Prediction predict(const Model& model, const Tensor& image);

}  // namespace sdl
