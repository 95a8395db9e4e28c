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
#include <string>
#include <string_view>
#include <vector>

#include "sdl/tensor.hpp"

namespace sdl::nn {

enum class Activation { linear, relu, relu6 };
enum class Padding { same, valid };
enum class Mode { train, eval };

// Convolution over [N, H, W, C] inputs. Standard kernels are stored as
// [kh, kw, in, out]; depthwise kernels as [kh, kw, in, multiplier] with output
// channel `c * multiplier + m`.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  Padding padding = Padding::same;
  bool depthwise = false;

  std::size_t channel_multiplier() const { return depthwise ? out_channels / in_channels : 1; }
  Shape weight_shape() const;
  void validate() const;
};

struct ConvGeometry {
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  std::size_t pad_top = 0;
  std::size_t pad_left = 0;
};

// "same" follows the ceil(in / stride) convention with the extra pixel of odd
// padding on the bottom/right.
ConvGeometry conv_geometry(const ConvSpec& spec, std::size_t in_h, std::size_t in_w);

struct ParamGrad {
  std::string name;
  Tensor grad;
};

struct LayerGrad {
  Tensor d_input;
  std::vector<ParamGrad> d_params;

  const Tensor& param(std::string_view name) const;
};

void activate_inplace(Tensor& t, Activation act);
// `output` is the post-activation tensor from the forward pass.
Tensor activation_backward(Activation act, const Tensor& output, const Tensor& upstream);

// `bias` may be null. Returns activation(conv(x, w) + b).
Tensor conv2d_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor* bias,
                      Activation act = Activation::linear);

// Backward of the linear part: `upstream` is the gradient w.r.t. conv(x, w) + b.
// Param grads are named "weight" and, if requested, "bias".
LayerGrad conv2d_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& upstream,
                          bool with_bias = true);

struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  float momentum = 0.1f;
  float epsilon = 1e-5f;

  // gamma = 1, beta = 0, running mean 0, running variance 1.
  static BatchNormState fresh(std::size_t channels);
  std::size_t channels() const { return gamma.size(); }
  void validate() const;
};

struct BatchNormCache {
  Tensor x_hat;
  std::vector<float> inv_std;
  Mode mode = Mode::eval;
};

// Normalizes over every axis but the last. Train mode uses biased batch
// statistics and blends them into the running statistics with `momentum`.
Tensor batchnorm_forward(const Tensor& x, BatchNormState& state, Mode mode, BatchNormCache* cache = nullptr);
// Param grads "gamma" and "beta".
LayerGrad batchnorm_backward(const BatchNormCache& cache, const BatchNormState& state, const Tensor& upstream);

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Activation act = Activation::linear);
// `upstream` is the gradient w.r.t. the affine output. Param grads "weight", "bias".
LayerGrad dense_backward(const Tensor& x, const Tensor& w, const Tensor& upstream);

Tensor global_avg_pool_forward(const Tensor& x);
Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& upstream);

// Row-wise softmax with max subtraction, evaluated in double precision.
Tensor softmax(const Tensor& logits);

enum class LossReduction { mean, sum };

inline constexpr double kProbabilityFloor = 1e-12;

struct LossResult {
  double loss = 0.0;
  // Gradient of the loss w.r.t. the logits that produced `probs`.
  Tensor d_logits;
};

// Categorical cross-entropy on softmax outputs, p_true clamped at
// kProbabilityFloor. The logit gradient is (probs - onehot), divided by N for
// the mean reduction.
LossResult cross_entropy(const Tensor& probs, const Tensor& onehot, LossReduction reduction = LossReduction::mean);

}  // namespace sdl::nn
