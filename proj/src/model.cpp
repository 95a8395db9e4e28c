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

#include "sdl/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "sdl/errors.hpp"
#include "sdl/random.hpp"

namespace sdl {

Variant parse_variant(std::string_view name) {
  if (name == "mobilenetv2-224") return Variant::mobilenetv2_224;
  if (name == "micronet-32") return Variant::micronet_32;
  throw ConfigError("unknown model variant '" + std::string(name) + "' (expected mobilenetv2-224 or micronet-32)");
}

std::string_view variant_name(Variant variant) {
  return variant == Variant::mobilenetv2_224 ? "mobilenetv2-224" : "micronet-32";
}

void ModelConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (!(width_multiplier > 0.0 && width_multiplier <= 1.0)) throw ConfigError("width_multiplier must lie in (0, 1]");
  for (std::size_t h : head_hidden) {
    if (h == 0) throw ConfigError("head hidden widths must be positive");
  }
}

std::size_t ModelConfig::input_size() const { return variant == Variant::mobilenetv2_224 ? 224 : 32; }

std::size_t make_divisible(double channels, std::size_t divisor) {
  const double d = static_cast<double>(divisor);
  std::size_t rounded = static_cast<std::size_t>(std::floor(channels / d + 0.5)) * divisor;
  rounded = std::max(rounded, divisor);
  // Never round down by more than 10%.
  if (static_cast<double>(rounded) < 0.9 * channels) rounded += divisor;
  return rounded;
}

BackboneTable backbone_table(const ModelConfig& config) {
  BackboneTable raw;
  if (config.variant == Variant::mobilenetv2_224) {
    raw.stem_channels = 32;
    raw.stages = {{1, 16, 1, 1}, {6, 24, 2, 2}, {6, 32, 3, 2}, {6, 64, 4, 2},
                  {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1}};
    raw.last_channels = 1280;
  } else {
    raw.stem_channels = 16;
    raw.stages = {{1, 8, 1, 1}, {4, 16, 2, 2}, {4, 24, 2, 2}};
    raw.last_channels = 64;
  }
  const double alpha = config.width_multiplier;
  BackboneTable scaled = raw;
  scaled.stem_channels = make_divisible(raw.stem_channels * alpha);
  for (auto& stage : scaled.stages) stage.out_channels = make_divisible(stage.out_channels * alpha);
  // The final feature width only grows with the multiplier, never shrinks.
  scaled.last_channels = alpha > 1.0 ? make_divisible(raw.last_channels * alpha) : raw.last_channels;
  return scaled;
}

namespace detail {

struct PassContext {
  nn::Mode mode = nn::Mode::eval;
  Tape* tape = nullptr;
  bool record = false;
  std::span<const Parameter> params;
  std::vector<Tensor>* grads = nullptr;

  Tape::Entry pop() {
    Tape::Entry e = std::move(tape->entries.back());
    tape->entries.pop_back();
    return e;
  }

  void accumulate(std::size_t index, const Tensor& g) {
    auto dst = (*grads)[index].data();
    const auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, PassContext& ctx) const = 0;
  virtual Tensor backward(const Tensor& dy, PassContext& ctx) const = 0;
};

namespace {

// Bias-free convolution, batch norm, activation.
class ConvBnAct final : public Layer {
 public:
  struct Indices {
    std::size_t weight, gamma, beta, mean, var;
  };

  ConvBnAct(nn::ConvSpec spec, nn::Activation act, Indices idx) : spec_(spec), act_(act), idx_(idx) {}

  Tensor forward(const Tensor& x, PassContext& ctx) const override {
    const auto& p = ctx.params;
    Tensor z = nn::conv2d_forward(x, spec_, p[idx_.weight].value, nullptr);
    nn::BatchNormState state{p[idx_.gamma].value, p[idx_.beta].value, p[idx_.mean].value, p[idx_.var].value};
    const nn::Mode mode = p[idx_.gamma].frozen ? nn::Mode::eval : ctx.mode;
    nn::BatchNormCache cache;
    Tensor y = nn::batchnorm_forward(z, state, mode, ctx.record ? &cache : nullptr);
    nn::activate_inplace(y, act_);
    if (mode == nn::Mode::train && ctx.tape) {
      ctx.tape->running_updates.emplace_back(idx_.mean, std::move(state.running_mean));
      ctx.tape->running_updates.emplace_back(idx_.var, std::move(state.running_var));
    }
    if (ctx.record) {
      ctx.tape->entries.push_back({{x, y, std::move(cache.x_hat)}, std::move(cache.inv_std), mode});
    }
    return y;
  }

  Tensor backward(const Tensor& dy, PassContext& ctx) const override {
    Tape::Entry e = ctx.pop();
    const auto& p = ctx.params;
    const Tensor g = nn::activation_backward(act_, e.tensors[1], dy);
    const nn::BatchNormCache cache{std::move(e.tensors[2]), std::move(e.inv_std), e.mode};
    const nn::BatchNormState state{p[idx_.gamma].value, p[idx_.beta].value, p[idx_.mean].value, p[idx_.var].value};
    nn::LayerGrad bn = nn::batchnorm_backward(cache, state, g);
    ctx.accumulate(idx_.gamma, bn.param("gamma"));
    ctx.accumulate(idx_.beta, bn.param("beta"));
    nn::LayerGrad conv = nn::conv2d_backward(e.tensors[0], spec_, p[idx_.weight].value, bn.d_input, false);
    ctx.accumulate(idx_.weight, conv.param("weight"));
    return std::move(conv.d_input);
  }

 private:
  nn::ConvSpec spec_;
  nn::Activation act_;
  Indices idx_;
};

// 1x1 expand (skipped when t = 1), 3x3 depthwise, 1x1 linear projection.
class InvertedResidual final : public Layer {
 public:
  InvertedResidual(std::vector<ConvBnAct> stages, bool residual) : stages_(std::move(stages)), residual_(residual) {}

  Tensor forward(const Tensor& x, PassContext& ctx) const override {
    Tensor y = x;
    for (const auto& s : stages_) y = s.forward(y, ctx);
    if (residual_) {
      auto out = y.data();
      const auto in = x.data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
    }
    return y;
  }

  Tensor backward(const Tensor& dy, PassContext& ctx) const override {
    Tensor d = dy;
    for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) d = it->backward(d, ctx);
    if (residual_) {
      auto out = d.data();
      const auto in = dy.data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
    }
    return d;
  }

 private:
  std::vector<ConvBnAct> stages_;
  bool residual_;
};

class Dense final : public Layer {
 public:
  Dense(std::size_t weight, std::size_t bias, nn::Activation act) : weight_(weight), bias_(bias), act_(act) {}

  Tensor forward(const Tensor& x, PassContext& ctx) const override {
    Tensor y = nn::dense_forward(x, ctx.params[weight_].value, ctx.params[bias_].value, act_);
    if (ctx.record) ctx.tape->entries.push_back({{x, y}, {}, ctx.mode});
    return y;
  }

  Tensor backward(const Tensor& dy, PassContext& ctx) const override {
    Tape::Entry e = ctx.pop();
    const Tensor g = nn::activation_backward(act_, e.tensors[1], dy);
    nn::LayerGrad grad = nn::dense_backward(e.tensors[0], ctx.params[weight_].value, g);
    ctx.accumulate(weight_, grad.param("weight"));
    ctx.accumulate(bias_, grad.param("bias"));
    return std::move(grad.d_input);
  }

 private:
  std::size_t weight_, bias_;
  nn::Activation act_;
};

class Builder {
 public:
  Builder(std::vector<Parameter>& params, std::uint64_t seed) : params_(params), rng_(seed) {}

  std::size_t add(std::string name, Shape shape, ParamKind kind, bool head, float fill) {
    params_.push_back({std::move(name), Tensor(std::move(shape), fill), kind, head, false});
    return params_.size() - 1;
  }

  std::size_t add_he(std::string name, Shape shape, std::size_t fan_in, bool head) {
    Tensor t(std::move(shape));
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (float& v : t.data()) v = static_cast<float>(stddev * rng_.normal());
    params_.push_back({std::move(name), std::move(t), ParamKind::trainable, head, false});
    return params_.size() - 1;
  }

  ConvBnAct conv_bn(const std::string& prefix, const nn::ConvSpec& spec, nn::Activation act) {
    const std::size_t fan_in = spec.kernel_h * spec.kernel_w * (spec.depthwise ? 1 : spec.in_channels);
    const std::size_t c = spec.out_channels;
    ConvBnAct::Indices idx{};
    idx.weight = add_he(prefix + ".conv.weight", spec.weight_shape(), fan_in, false);
    idx.gamma = add(prefix + ".bn.gamma", Shape{c}, ParamKind::trainable, false, 1.0f);
    idx.beta = add(prefix + ".bn.beta", Shape{c}, ParamKind::trainable, false, 0.0f);
    idx.mean = add(prefix + ".bn.running_mean", Shape{c}, ParamKind::buffer, false, 0.0f);
    idx.var = add(prefix + ".bn.running_var", Shape{c}, ParamKind::buffer, false, 1.0f);
    return ConvBnAct(spec, act, idx);
  }

 private:
  std::vector<Parameter>& params_;
  Rng rng_;
};

nn::ConvSpec pointwise(std::size_t in, std::size_t out) {
  return nn::ConvSpec{in, out, 1, 1, 1, 1, nn::Padding::same, false};
}

}  // namespace
}  // namespace detail

Model build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  using detail::Builder;
  using nn::Activation;

  Model model;
  model.config_ = config;
  Builder b(model.params_, seed);
  const BackboneTable table = backbone_table(config);

  {
    const nn::ConvSpec stem{3, table.stem_channels, 3, 3, 2, 2, nn::Padding::same, false};
    model.backbone_.push_back(std::make_shared<detail::ConvBnAct>(b.conv_bn("stem", stem, Activation::relu6)));
  }

  std::size_t channels = table.stem_channels;
  std::size_t block = 0;
  for (const auto& stage : table.stages) {
    for (std::size_t r = 0; r < stage.repeat; ++r, ++block) {
      const std::size_t stride = r == 0 ? stage.stride : 1;
      const std::size_t hidden = channels * stage.expansion;
      const std::string prefix = "block" + std::to_string(block);
      std::vector<detail::ConvBnAct> parts;
      if (stage.expansion != 1) {
        parts.push_back(b.conv_bn(prefix + ".expand", detail::pointwise(channels, hidden), Activation::relu6));
      }
      const nn::ConvSpec dw{hidden, hidden, 3, 3, stride, stride, nn::Padding::same, true};
      parts.push_back(b.conv_bn(prefix + ".depthwise", dw, Activation::relu6));
      parts.push_back(
          b.conv_bn(prefix + ".project", detail::pointwise(hidden, stage.out_channels), Activation::linear));
      const bool residual = stride == 1 && channels == stage.out_channels;
      model.backbone_.push_back(std::make_shared<detail::InvertedResidual>(std::move(parts), residual));
      channels = stage.out_channels;
    }
  }
  model.backbone_.push_back(std::make_shared<detail::ConvBnAct>(
      b.conv_bn("last", detail::pointwise(channels, table.last_channels), Activation::relu6)));
  channels = table.last_channels;

  for (std::size_t j = 0; j < config.head_hidden.size(); ++j) {
    const std::size_t width = config.head_hidden[j];
    const std::string prefix = "head.hidden" + std::to_string(j);
    const std::size_t w = b.add_he(prefix + ".weight", Shape{channels, width}, channels, true);
    const std::size_t bias = b.add(prefix + ".bias", Shape{width}, ParamKind::trainable, true, 0.0f);
    model.head_.push_back(std::make_shared<detail::Dense>(w, bias, Activation::relu));
    channels = width;
  }
  const std::size_t w = b.add_he("head.logits.weight", Shape{channels, config.num_classes}, channels, true);
  const std::size_t bias = b.add("head.logits.bias", Shape{config.num_classes}, ParamKind::trainable, true, 0.0f);
  model.head_.push_back(std::make_shared<detail::Dense>(w, bias, Activation::linear));
  return model;
}

void freeze_backbone(Model& model, bool frozen) {
  for (auto& p : model.params_) {
    if (!p.head) p.frozen = frozen;
  }
  model.backbone_frozen_ = frozen;
}

const Parameter& Model::parameter(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ConfigError("model has no parameter named " + std::string(name));
}

Parameter& Model::parameter(std::string_view name) {
  return const_cast<Parameter&>(std::as_const(*this).parameter(name));
}

std::size_t Model::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.kind == ParamKind::trainable) n += p.value.size();
  }
  return n;
}

void Model::check_input(const Tensor& images) const {
  const std::size_t s = config_.input_size();
  if (images.rank() != 4 || images.dim(1) != s || images.dim(2) != s || images.dim(3) != 3) {
    throw ShapeError(std::string(variant_name(config_.variant)) + " expects [N," + std::to_string(s) + "," +
                     std::to_string(s) + ",3] input, got " + images.shape().to_string());
  }
}

Tensor Model::run(const Tensor& images, nn::Mode mode, Tape* tape) const {
  check_input(images);
  detail::PassContext ctx;
  ctx.mode = mode;
  ctx.tape = tape;
  ctx.params = params_;
  ctx.record = tape != nullptr && !backbone_frozen_;

  Tensor x = images;
  for (const auto& layer : backbone_) x = layer->forward(x, ctx);
  if (tape) tape->pooled_input = x.shape();
  x = nn::global_avg_pool_forward(x);
  ctx.record = tape != nullptr;
  for (const auto& layer : head_) x = layer->forward(x, ctx);
  x.require_finite("model forward");
  return x;
}

Tensor Model::forward(const Tensor& images) const { return run(images, nn::Mode::eval, nullptr); }

Tensor Model::forward_train(const Tensor& images, Tape& tape) const {
  tape.entries.clear();
  tape.running_updates.clear();
  return run(images, nn::Mode::train, &tape);
}

std::vector<Tensor> Model::backward(Tape& tape, const Tensor& d_logits) const {
  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (const auto& p : params_) grads.emplace_back(p.value.shape());

  detail::PassContext ctx;
  ctx.tape = &tape;
  ctx.params = params_;
  ctx.grads = &grads;

  Tensor d = d_logits;
  for (auto it = head_.rbegin(); it != head_.rend(); ++it) d = (*it)->backward(d, ctx);
  if (!backbone_frozen_) {
    d = nn::global_avg_pool_backward(tape.pooled_input, d);
    for (auto it = backbone_.rbegin(); it != backbone_.rend(); ++it) d = (*it)->backward(d, ctx);
  }
  return grads;
}

void Model::commit_running_stats(const Tape& tape) {
  for (const auto& [index, value] : tape.running_updates) params_[index].value = value;
}

namespace {

constexpr char kMagic[4] = {'S', 'D', 'L', 'W'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string take(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("weights file truncated while reading ") + what);
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

struct Record {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

}  // namespace

void save_weights(const Model& model, const std::filesystem::path& path) {
  std::string out(kMagic, 4);
  put_u32(out, kWeightsVersion);
  for (const auto& p : model.parameters()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    const auto& dims = p.value.shape().dims();
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : p.value.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open " + tmp.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void load_weights(const std::filesystem::path& path, Model& model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open weights file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader r(bytes);
  if (r.take(4, "magic") != std::string(kMagic, 4)) {
    throw FormatError(path.string() + " is not an SDLW weights file");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kWeightsVersion) {
    throw FormatError("unsupported SDLW version " + std::to_string(version) + " (expected " +
                      std::to_string(kWeightsVersion) + ")");
  }

  std::vector<Record> records;
  while (!r.done()) {
    Record rec;
    const std::uint32_t name_len = r.u32("name length");
    rec.name = r.take(name_len, "tensor name");
    const std::uint32_t rank = r.u32("rank");
    r.need(std::size_t{rank} * 4, "dims");
    std::vector<std::size_t> dims(rank);
    std::size_t numel = 1;
    for (auto& d : dims) {
      d = r.u32("dims");
      if (d == 0) throw FormatError("tensor " + rec.name + " has a zero dimension");
      numel *= d;
      r.need(numel * 4, "tensor data");
    }
    rec.shape = Shape(std::move(dims));
    rec.values.resize(numel);
    for (auto& v : rec.values) v = std::bit_cast<float>(r.u32("tensor data"));
    records.push_back(std::move(rec));
  }

  auto params = model.parameters();
  const std::size_t common = std::min(records.size(), params.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (records[i].name != params[i].name) {
      throw ShapeError("weights file tensor " + std::to_string(i) + " is '" + records[i].name + "', model expects '" +
                       params[i].name + "'");
    }
    if (records[i].shape != params[i].value.shape()) {
      throw ShapeError("shape mismatch for tensor " + params[i].name + ": model " +
                       params[i].value.shape().to_string() + ", file " + records[i].shape.to_string());
    }
  }
  if (records.size() < params.size()) {
    throw ShapeError("weights file is missing tensor " + params[records.size()].name);
  }
  if (records.size() > params.size()) {
    throw ShapeError("weights file has unexpected tensor " + records[params.size()].name);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].value = Tensor(records[i].shape, std::move(records[i].values));
  }
}

Prediction predict(const Model& model, const Tensor& image) {
  Tensor batch = image.rank() == 3 ? image.reshaped(Shape{1, image.dim(0), image.dim(1), image.dim(2)}) : image;
  if (batch.rank() != 4 || batch.dim(0) != 1) {
    throw ShapeError("predict expects a single [H,W,3] image, got " + image.shape().to_string());
  }
  const Tensor probs = nn::softmax(model.forward(batch));
  Prediction p;
  p.probabilities.assign(probs.data().begin(), probs.data().end());
  p.class_index = static_cast<std::size_t>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                           p.probabilities.begin());
  return p;
}

}  // namespace sdl
