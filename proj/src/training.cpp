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

#include "sdl/training.hpp"

#include "sdl/errors.hpp"

namespace sdl {

namespace {

std::size_t argmax_row(std::span<const float> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

}  // namespace

Trainer::Trainer(Model& model, AdamConfig config) : model_(model), state_(config) { config.validate(); }

StepResult Trainer::step(const Tensor& images, const Tensor& onehot) {
  const Tensor logits = model_.forward_train(images, tape_);
  const Tensor probs = nn::softmax(logits);
  const nn::LossResult loss = nn::cross_entropy(probs, onehot);
  const std::vector<Tensor> grads = model_.backward(tape_, loss.d_logits);

  std::vector<Tensor*> params;
  std::vector<Tensor> selected;
  auto all = model_.parameters();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].updatable()) {
      params.push_back(&all[i].value);
      selected.push_back(grads[i]);
    }
  }
  adam_step(params, selected, state_);
  model_.commit_running_stats(tape_);

  StepResult r{loss.loss, 0};
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = logits.data().subspan(i * k, k);
    const auto y = onehot.data().subspan(i * k, k);
    if (argmax_row(z) == argmax_row(y)) ++r.correct;
  }
  return r;
}

std::vector<std::size_t> predict_labels(const Model& model, const Dataset& dataset,
                                        std::span<const std::size_t> indices, std::size_t batch_size) {
  BatchOptions opts;
  opts.batch_size = batch_size;
  opts.shuffle = false;
  opts.num_classes = model.config().num_classes;
  BatchIterator it(dataset, {indices.begin(), indices.end()}, opts, 0);
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  while (auto batch = it.next()) {
    const Tensor logits = model.forward(batch->images);
    const Tensor pred = reduce(ReduceOp::argmax, logits, 1);
    for (float p : pred.data()) out.push_back(static_cast<std::size_t>(p));
  }
  return out;
}

double accuracy(const Model& model, const Dataset& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DatasetError("accuracy over an empty index set");
  const auto pred = predict_labels(model, dataset, indices);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (pred[i] == dataset.samples[indices[i]].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

std::vector<EpochStats> fit(Model& model, const Dataset& dataset, const Split& split, const TrainConfig& config,
                            const std::function<void(const EpochStats&)>& on_epoch) {
  if (split.train.empty()) throw DatasetError("training split is empty");
  if (config.epochs == 0) throw ConfigError("epochs must be positive");
  Trainer trainer(model, config.adam);
  BatchOptions opts;
  opts.batch_size = config.batch_size;
  opts.num_classes = model.config().num_classes;
  opts.seed = config.seed;
  opts.augment = config.augment;

  std::vector<EpochStats> history;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    BatchIterator it(dataset, split.train, opts, epoch);
    double loss_sum = 0.0;
    while (auto batch = it.next()) {
      const StepResult r = trainer.step(batch->images, batch->labels);
      loss_sum += r.loss * static_cast<double>(batch->indices.size());
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(split.train.size());
    stats.train_accuracy = accuracy(model, dataset, split.train);
    if (!split.val.empty()) stats.val_accuracy = accuracy(model, dataset, split.val);
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (config.stop_at_perfect_train && stats.train_accuracy == 1.0) break;
  }
  return history;
}

}  // namespace sdl
