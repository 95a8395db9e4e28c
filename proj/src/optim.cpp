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

#include "sdl/optim.hpp"

#include <cmath>
#include <string>

#include "sdl/errors.hpp"

namespace sdl {

namespace {

void check_aligned(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer got " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape()) {
      throw ShapeError("gradient " + std::to_string(i) + " has shape " + grads[i].shape().to_string() +
                       ", parameter has " + params[i]->shape().to_string());
    }
  }
}

}  // namespace

void AdamConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state) {
  check_aligned(params, grads);
  state.config.validate();
  if (state.step == 0) {
    state.m.clear();
    state.v.clear();
    for (const Tensor* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  } else if (state.m.size() != params.size()) {
    throw ShapeError("Adam state tracks " + std::to_string(state.m.size()) + " parameters, step got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].shape() != params[i]->shape()) {
      throw ShapeError("Adam moment " + std::to_string(i) + " has shape " + state.m[i].shape().to_string() +
                       ", parameter has " + params[i]->shape().to_string());
    }
  }

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->data();
    const auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g[j];
      const double mj = c.beta1 * m[j] + (1.0 - c.beta1) * gj;
      const double vj = c.beta2 * v[j] + (1.0 - c.beta2) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double m_hat = mj / correct1;
      const double v_hat = vj / correct2;
      w[j] = static_cast<float>(w[j] - c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon));
    }
  }
}

void sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr) {
  check_aligned(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->data();
    const auto g = grads[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = static_cast<float>(w[j] - lr * g[j]);
  }
}

}  // namespace sdl
