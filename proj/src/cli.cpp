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

#include "sdl/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "sdl/dataset.hpp"
#include "sdl/errors.hpp"
#include "sdl/metrics.hpp"
#include "sdl/random.hpp"
#include "sdl/training.hpp"

namespace sdl::cli {

namespace {

// Sub-streams of the root seed.
enum Stream : std::uint64_t { kInitStream = 1, kAugmentStream = 2, kShuffleStream = 3, kSplitStream = 4, kFrameStream = 5 };

std::uint64_t stream_seed(std::uint64_t root, Stream s) { return derive_seed({root, s}); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw FormatError("failed writing " + path);
}

void emit_json(const nlohmann::ordered_json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Model load_model(const ModelConfig& config, const std::string& weights) {
  Model model = build_model(config, 0);
  load_weights(weights, model);
  return model;
}

void print_confusion(const ConfusionMatrix& cm, std::ostream& out) {
  out << "confusion matrix (rows = actual, columns = predicted)\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "");
  out << buf;
  for (const auto& name : cm.class_names()) {
    std::snprintf(buf, sizeof buf, "%10s", name.c_str());
    out << buf;
  }
  out << '\n';
  for (std::size_t a = 0; a < cm.num_classes(); ++a) {
    std::snprintf(buf, sizeof buf, "%-10s", cm.class_names()[a].c_str());
    out << buf;
    for (std::size_t p = 0; p < cm.num_classes(); ++p) {
      std::snprintf(buf, sizeof buf, "%10llu", static_cast<unsigned long long>(cm.at(a, p)));
      out << buf;
    }
    out << '\n';
  }
}

void report_issues(const Dataset& ds, std::ostream& out) {
  for (const auto& w : ds.warnings) out << "# warning: " << w.path.string() << ": " << w.message << '\n';
  for (const auto& e : ds.errors) out << "# error: " << e.message << '\n';
}

}  // namespace

ModelConfig ModelOptions::to_config() const {
  ModelConfig c;
  c.variant = parse_variant(variant);
  c.width_multiplier = width_multiplier;
  c.head_hidden = head_hidden;
  c.validate();
  return c;
}

void cmd_train(const TrainOptions& o, std::ostream& out) {
  const ModelConfig mc = o.model.to_config();
  require(!o.data.empty(), "train: --data is required");
  require(o.epochs > 0, "train: epochs must be positive");
  require(o.batch_size > 0, "train: batch size must be positive");
  require(o.lr > 0.0, "train: learning rate must be positive");
  require(!o.out.empty(), "train: --out must name a weights file");
  SplitConfig split_cfg{1.0 - o.val_fraction, o.val_fraction, 0.0, stream_seed(o.seed, kSplitStream)};
  require(o.val_fraction >= 0.0 && o.val_fraction < 1.0, "train: val fraction must lie in [0, 1)");
  split_cfg.validate();
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.adam.lr = o.lr;
  tc.adam.validate();
  tc.seed = stream_seed(o.seed, kShuffleStream);
  if (o.augment) {
    AugmentConfig aug = o.augment_config;
    aug.seed = stream_seed(o.seed, kAugmentStream);
    aug.validate();
    tc.augment = aug;
  }

  const Dataset ds = load_dataset(o.data, mc.input_size());
  report_issues(ds, out);
  const Split split = stratified_split(ds, split_cfg);
  Model model = build_model(mc, stream_seed(o.seed, kInitStream));
  if (!o.init_weights.empty()) load_weights(o.init_weights, model);
  freeze_backbone(model, o.freeze_backbone);

  const std::string log_path = o.log.empty() ? o.out + ".log" : o.log;
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw FormatError("cannot open training log " + log_path);

  const std::string header = "# train seed=" + std::to_string(o.seed) + " variant=" + o.model.variant +
                             " epochs=" + std::to_string(o.epochs) + " batch=" + std::to_string(o.batch_size) +
                             " lr=" + fixed(o.lr, 6) + " augment=" + (o.augment ? "on" : "off") +
                             " frozen_backbone=" + (o.freeze_backbone ? "yes" : "no") +
                             " train=" + std::to_string(split.train.size()) + " val=" + std::to_string(split.val.size());
  out << header << '\n';
  log << header << '\n';

  fit(model, ds, split, tc, [&](const EpochStats& s) {
    const std::string line = "epoch " + std::to_string(s.epoch) + " train_loss " + fixed(s.train_loss, 6) +
                             " train_acc " + fixed(s.train_accuracy, 4) + " val_acc " +
                             (s.val_accuracy ? fixed(*s.val_accuracy, 4) : std::string("-"));
    out << line << '\n';
    log << line << '\n';
  });
  save_weights(model, o.out);
  out << "# saved " << o.out << '\n';
}

nlohmann::ordered_json eval_report_json(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                        std::uint64_t seed) {
  const std::vector<std::string> names(kClassNames.begin(), kClassNames.end());
  const ConfusionMatrix cm = confusion_from_predictions(actual, predicted, kNumClasses, names);
  nlohmann::ordered_json j = report(cm).to_json();
  j["seed"] = seed;
  return j;
}

nlohmann::ordered_json cmd_eval(const EvalOptions& o, std::ostream& out) {
  const ModelConfig mc = o.model.to_config();
  require(!o.weights.empty(), "eval: --weights is required");
  require(!o.data.empty(), "eval: --data is required");
  require(!o.out.empty(), "eval: --out must name a file");

  const Model model = load_model(mc, o.weights);
  const Dataset ds = load_dataset(o.data, mc.input_size());
  report_issues(ds, out);
  const std::vector<std::size_t> indices = all_indices(ds);
  const std::vector<std::size_t> predicted = predict_labels(model, ds, indices);
  std::vector<std::size_t> actual;
  for (const auto& s : ds.samples) actual.push_back(s.label);

  const nlohmann::ordered_json j = eval_report_json(actual, predicted, o.seed);
  emit_json(j, o.out, out);
  const std::vector<std::string> names(kClassNames.begin(), kClassNames.end());
  print_confusion(confusion_from_predictions(actual, predicted, kNumClasses, names), out);
  out << "micro accuracy " << fixed(j["micro_accuracy"].get<double>(), 4) << '\n';
  return j;
}

Prediction cmd_predict(const PredictOptions& o, std::ostream& out) {
  const ModelConfig mc = o.model.to_config();
  require(!o.weights.empty(), "predict: --weights is required");
  require(!o.image.empty(), "predict: --image is required");
  const Model model = load_model(mc, o.weights);
  const Tensor image = normalize(resize_bilinear(read_ppm(o.image), mc.input_size(), mc.input_size()));
  const Prediction p = predict(model, image);
  out << "prediction: " << kClassNames.at(p.class_index) << '\n';
  for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
    out << "p(" << (c < kNumClasses ? std::string(kClassNames[c]) : std::to_string(c)) << ") = "
        << fixed(p.probabilities[c], 6) << '\n';
  }
  return p;
}

bench::BenchReport cmd_bench(const BenchOptions& o, std::ostream& out) {
  const ModelConfig mc = o.model.to_config();
  require(o.frames >= bench::kMinTimedFrames,
          "bench: --frames must be at least " + std::to_string(bench::kMinTimedFrames));
  require(!o.source.empty(), "bench: --source must be 'synthetic' or a directory");

  Model model = build_model(mc, stream_seed(o.seed, kInitStream));
  if (!o.weights.empty()) load_weights(o.weights, model);
  std::unique_ptr<bench::FrameSource> source;
  if (o.source == "synthetic") {
    source = std::make_unique<bench::SyntheticFrameSource>(mc.input_size(), stream_seed(o.seed, kFrameStream));
  } else {
    source = std::make_unique<bench::DirectoryFrameSource>(o.source, mc.input_size());
  }
  const bench::BenchReport r = bench::run_benchmark(bench::model_classifier(model), *source, o.frames, o.warmup);
  nlohmann::ordered_json j = r.to_json();
  j["variant"] = o.model.variant;
  j["seed"] = o.seed;
  emit_json(j, o.out, out);
  return r;
}

stats::TTestResult cmd_ttest(const TTestOptions& o, std::ostream& out) {
  const stats::Tails tails = stats::parse_tails(o.tails);
  require(!o.file_a.empty() && !o.file_b.empty(), "ttest: two sample files are required");
  const std::vector<double> a = stats::read_samples(o.file_a);
  const std::vector<double> b = stats::read_samples(o.file_b);
  const stats::TTestResult r = stats::two_sample_t_test(a, b, tails);
  emit_json(r.to_json(), o.out, out);
  return r;
}

namespace {

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--variant", m.variant, "mobilenetv2-224 | micronet-32")->capture_default_str();
  cmd->add_option("--width", m.width_multiplier, "Width multiplier in (0, 1]")->capture_default_str();
  cmd->add_option("--head-hidden", m.head_hidden, "Hidden dense widths of the head, comma separated")
      ->delimiter(',')
      ->capture_default_str();
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-class (Admin / Intruder / No Human) frame classifier"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "INI file with one [section] per subcommand");

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train a model and write SDLW weights");
  t->add_option("--data", train.data, "Dataset root with admin/, intruder/, no_human/");
  add_model_options(t, train.model);
  t->add_option("--epochs", train.epochs)->capture_default_str();
  t->add_option("--batch", train.batch_size)->capture_default_str();
  t->add_option("--lr", train.lr)->capture_default_str();
  t->add_option("--seed", train.seed, "Root seed")->capture_default_str();
  t->add_option("--val-fraction", train.val_fraction)->capture_default_str();
  t->add_flag("--augment,!--no-augment", train.augment, "On-the-fly rotation/scale/flip augmentation");
  t->add_option("--rotation", train.augment_config.rotation_deg, "Max rotation in degrees")->capture_default_str();
  t->add_option("--scale-min", train.augment_config.scale_min)->capture_default_str();
  t->add_option("--scale-max", train.augment_config.scale_max)->capture_default_str();
  t->add_option("--hflip", train.augment_config.hflip_prob, "Horizontal flip probability")->capture_default_str();
  t->add_flag("--freeze-backbone", train.freeze_backbone, "Train the classifier head only");
  t->add_option("--init-weights", train.init_weights, "SDLW file to start from");
  t->add_option("--out", train.out, "Weights output path")->capture_default_str();
  t->add_option("--log", train.log, "Training log path (default <out>.log)");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Evaluate weights on a dataset and write a metrics JSON report");
  e->add_option("--weights", eval.weights);
  e->add_option("--data", eval.data);
  add_model_options(e, eval.model);
  e->add_option("--seed", eval.seed, "Root seed recorded in the report")->capture_default_str();
  e->add_option("--out", eval.out, "Metrics JSON path")->capture_default_str();

  PredictOptions pred;
  auto* p = app.add_subcommand("predict", "Classify one PPM image");
  p->add_option("--weights", pred.weights);
  p->add_option("--image", pred.image);
  add_model_options(p, pred.model);

  BenchOptions bench_opts;
  auto* b = app.add_subcommand("bench", "Measure single-stream latency and FPS");
  b->add_option("--weights", bench_opts.weights, "SDLW weights (random init when omitted)");
  b->add_option("--source", bench_opts.source, "'synthetic' or a directory of PPM frames")->capture_default_str();
  add_model_options(b, bench_opts.model);
  b->add_option("--frames", bench_opts.frames, "Timed frames")->capture_default_str();
  b->add_option("--warmup", bench_opts.warmup, "Untimed warmup frames")->capture_default_str();
  b->add_option("--seed", bench_opts.seed)->capture_default_str();
  b->add_option("--out", bench_opts.out, "Report path (stdout when omitted)");

  TTestOptions tt;
  auto* s = app.add_subcommand("ttest", "Pooled two-sample t-test on two files of numbers");
  s->add_option("file_a", tt.file_a)->required();
  s->add_option("file_b", tt.file_b)->required();
  s->add_option("--tails", tt.tails, "one | two")->capture_default_str();
  s->add_option("--out", tt.out, "Result path (stdout when omitted)");

  std::vector<const char*> argv{"sdl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) return app.exit(ex, out, err);
    err << "error: " << ex.what() << '\n';
    return kExitUsageError;
  }

  try {
    if (*t) cmd_train(train, out);
    if (*e) cmd_eval(eval, out);
    if (*p) cmd_predict(pred, out);
    if (*b) cmd_bench(bench_opts, out);
    if (*s) cmd_ttest(tt, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsageError;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace sdl::cli
