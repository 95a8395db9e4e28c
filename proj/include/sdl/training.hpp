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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sdl/dataset.hpp"
#include "sdl/model.hpp"
#include "sdl/optim.hpp"

namespace sdl {

struct StepResult {
  double loss = 0.0;
  std::size_t correct = 0;
};

// One Adam step on a batch: train-mode forward, softmax + mean cross-entropy,
// backward, update of non-frozen parameters, running-statistics commit.
class Trainer {
 public:
  Trainer(Model& model, AdamConfig config);

  StepResult step(const Tensor& images, const Tensor& onehot);
  const AdamState& optimizer() const { return state_; }

 private:
  Model& model_;
  AdamState state_;
  Tape tape_;
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::optional<AugmentConfig> augment;
  // Ends training after the first epoch whose train accuracy is 1.
  bool stop_at_perfect_train = false;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
};

// Eval-mode predictions in index order.
std::vector<std::size_t> predict_labels(const Model& model, const Dataset& dataset,
                                        std::span<const std::size_t> indices, std::size_t batch_size = 32);

double accuracy(const Model& model, const Dataset& dataset, std::span<const std::size_t> indices);

// Accuracies are measured in eval mode on unaugmented images after each epoch.
std::vector<EpochStats> fit(Model& model, const Dataset& dataset, const Split& split, const TrainConfig& config,
                            const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace sdl
