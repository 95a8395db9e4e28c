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

#include <cstdint>
#include <span>
#include <vector>

#include "sdl/tensor.hpp"

namespace sdl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Moments are created on the first step with the parameters' shapes.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

// Bias-corrected Adam:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   w <- w - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// `params[i]` pairs with `grads[i]`. Frozen parameters must be left out by the
// caller; the parameter list has to stay the same across steps.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);

// w <- w - lr * g
void sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr);

}  // namespace sdl
