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

#include "sdl/nn.hpp"

#include <algorithm>
#include <cmath>

#include "sdl/errors.hpp"

namespace sdl::nn {

namespace {

void require_nhwc(const Tensor& x, std::size_t channels, const char* what) {
  if (x.rank() != 4 || x.dim(3) != channels) {
    throw ShapeError(std::string(what) + ": expected [N,H,W," + std::to_string(channels) + "] input, got " +
                     x.shape().to_string());
  }
}

}  // namespace

Shape ConvSpec::weight_shape() const {
  return Shape{kernel_h, kernel_w, in_channels, depthwise ? channel_multiplier() : out_channels};
}

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0 || kernel_h == 0 || kernel_w == 0 || stride_h == 0 || stride_w == 0) {
    throw ShapeError("conv spec has a zero channel, kernel or stride");
  }
  if (depthwise && out_channels % in_channels != 0) {
    throw ShapeError("depthwise conv needs out_channels (" + std::to_string(out_channels) +
                     ") to be a multiple of in_channels (" + std::to_string(in_channels) + ")");
  }
}

ConvGeometry conv_geometry(const ConvSpec& spec, std::size_t in_h, std::size_t in_w) {
  ConvGeometry g;
  if (spec.padding == Padding::same) {
    g.out_h = (in_h + spec.stride_h - 1) / spec.stride_h;
    g.out_w = (in_w + spec.stride_w - 1) / spec.stride_w;
    const std::size_t need_h = (g.out_h - 1) * spec.stride_h + spec.kernel_h;
    const std::size_t need_w = (g.out_w - 1) * spec.stride_w + spec.kernel_w;
    g.pad_top = need_h > in_h ? (need_h - in_h) / 2 : 0;
    g.pad_left = need_w > in_w ? (need_w - in_w) / 2 : 0;
  } else {
    if (in_h < spec.kernel_h || in_w < spec.kernel_w) {
      throw ShapeError("valid conv: kernel " + std::to_string(spec.kernel_h) + "x" + std::to_string(spec.kernel_w) +
                       " larger than input " + std::to_string(in_h) + "x" + std::to_string(in_w));
    }
    g.out_h = (in_h - spec.kernel_h) / spec.stride_h + 1;
    g.out_w = (in_w - spec.kernel_w) / spec.stride_w + 1;
  }
  return g;
}

const Tensor& LayerGrad::param(std::string_view name) const {
  for (const auto& p : d_params) {
    if (p.name == name) return p.grad;
  }
  throw ShapeError("no gradient named " + std::string(name));
}

void activate_inplace(Tensor& t, Activation act) {
  auto d = t.data();
  switch (act) {
    case Activation::linear:
      break;
    case Activation::relu:
      for (float& v : d) v = std::max(v, 0.0f);
      break;
    case Activation::relu6:
      for (float& v : d) v = std::clamp(v, 0.0f, 6.0f);
      break;
  }
}

Tensor activation_backward(Activation act, const Tensor& output, const Tensor& upstream) {
  if (output.shape() != upstream.shape()) {
    throw ShapeError("activation backward: output " + output.shape().to_string() + " vs upstream " +
                     upstream.shape().to_string());
  }
  if (act == Activation::linear) return upstream;
  Tensor d = upstream;
  const auto y = output.data();
  auto g = d.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool pass = act == Activation::relu ? y[i] > 0.0f : (y[i] > 0.0f && y[i] < 6.0f);
    if (!pass) g[i] = 0.0f;
  }
  return d;
}

Tensor conv2d_forward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor* bias, Activation act) {
  spec.validate();
  require_nhwc(x, spec.in_channels, "conv2d");
  if (w.shape() != spec.weight_shape()) {
    throw ShapeError("conv2d: weight " + w.shape().to_string() + " does not match spec " +
                     spec.weight_shape().to_string());
  }
  if (bias && (bias->rank() != 1 || bias->size() != spec.out_channels)) {
    throw ShapeError("conv2d: bias " + bias->shape().to_string() + " needs " + std::to_string(spec.out_channels) +
                     " channels");
  }
  const std::size_t n_batch = x.dim(0), in_h = x.dim(1), in_w = x.dim(2);
  const ConvGeometry g = conv_geometry(spec, in_h, in_w);
  const std::size_t cin = spec.in_channels, cout = spec.out_channels, mult = spec.channel_multiplier();
  const std::size_t kh_n = spec.kernel_h, kw_n = spec.kernel_w;

  Tensor y(Shape{n_batch, g.out_h, g.out_w, cout});
  const float* px = x.raw();
  const float* pw = w.raw();
  float* py = y.raw();

  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t oh = 0; oh < g.out_h; ++oh) {
      for (std::size_t ow = 0; ow < g.out_w; ++ow) {
        float* out = py + ((n * g.out_h + oh) * g.out_w + ow) * cout;
        if (bias) std::copy_n(bias->raw(), cout, out);
        for (std::size_t kh = 0; kh < kh_n; ++kh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * spec.stride_h + kh) -
                                    static_cast<std::ptrdiff_t>(g.pad_top);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(in_h)) continue;
          for (std::size_t kw = 0; kw < kw_n; ++kw) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * spec.stride_w + kw) -
                                      static_cast<std::ptrdiff_t>(g.pad_left);
            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(in_w)) continue;
            const float* in = px + ((n * in_h + ih) * in_w + iw) * cin;
            const float* wk = pw + (kh * kw_n + kw) * cin * (spec.depthwise ? mult : cout);
            if (spec.depthwise) {
              for (std::size_t c = 0; c < cin; ++c) {
                const float v = in[c];
                for (std::size_t m = 0; m < mult; ++m) out[c * mult + m] += v * wk[c * mult + m];
              }
            } else {
              for (std::size_t c = 0; c < cin; ++c) {
                const float v = in[c];
                const float* wrow = wk + c * cout;
                for (std::size_t o = 0; o < cout; ++o) out[o] += v * wrow[o];
              }
            }
          }
        }
      }
    }
  }
  activate_inplace(y, act);
  y.require_finite("conv2d");
  return y;
}

LayerGrad conv2d_backward(const Tensor& x, const ConvSpec& spec, const Tensor& w, const Tensor& upstream,
                          bool with_bias) {
  spec.validate();
  require_nhwc(x, spec.in_channels, "conv2d backward");
  if (w.shape() != spec.weight_shape()) {
    throw ShapeError("conv2d backward: weight " + w.shape().to_string() + " does not match spec " +
                     spec.weight_shape().to_string());
  }
  const std::size_t n_batch = x.dim(0), in_h = x.dim(1), in_w = x.dim(2);
  const ConvGeometry g = conv_geometry(spec, in_h, in_w);
  const std::size_t cin = spec.in_channels, cout = spec.out_channels, mult = spec.channel_multiplier();
  const std::size_t kh_n = spec.kernel_h, kw_n = spec.kernel_w;
  const Shape out_shape{n_batch, g.out_h, g.out_w, cout};
  if (upstream.shape() != out_shape) {
    throw ShapeError("conv2d backward: upstream " + upstream.shape().to_string() + " vs output " +
                     out_shape.to_string());
  }

  Tensor dx(x.shape());
  Tensor dw(w.shape());
  const float* px = x.raw();
  const float* pw = w.raw();
  const float* pg = upstream.raw();
  float* pdx = dx.raw();
  float* pdw = dw.raw();

  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t oh = 0; oh < g.out_h; ++oh) {
      for (std::size_t ow = 0; ow < g.out_w; ++ow) {
        const float* gout = pg + ((n * g.out_h + oh) * g.out_w + ow) * cout;
        for (std::size_t kh = 0; kh < kh_n; ++kh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * spec.stride_h + kh) -
                                    static_cast<std::ptrdiff_t>(g.pad_top);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(in_h)) continue;
          for (std::size_t kw = 0; kw < kw_n; ++kw) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * spec.stride_w + kw) -
                                      static_cast<std::ptrdiff_t>(g.pad_left);
            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(in_w)) continue;
            const std::size_t in_off = ((n * in_h + ih) * in_w + iw) * cin;
            const std::size_t w_off = (kh * kw_n + kw) * cin * (spec.depthwise ? mult : cout);
            const float* in = px + in_off;
            float* din = pdx + in_off;
            const float* wk = pw + w_off;
            float* dwk = pdw + w_off;
            if (spec.depthwise) {
              for (std::size_t c = 0; c < cin; ++c) {
                float acc = 0.0f;
                for (std::size_t m = 0; m < mult; ++m) {
                  const float go = gout[c * mult + m];
                  dwk[c * mult + m] += in[c] * go;
                  acc += wk[c * mult + m] * go;
                }
                din[c] += acc;
              }
            } else {
              for (std::size_t c = 0; c < cin; ++c) {
                const float v = in[c];
                const float* wrow = wk + c * cout;
                float* dwrow = dwk + c * cout;
                float acc = 0.0f;
                for (std::size_t o = 0; o < cout; ++o) {
                  dwrow[o] += v * gout[o];
                  acc += wrow[o] * gout[o];
                }
                din[c] += acc;
              }
            }
          }
        }
      }
    }
  }

  LayerGrad grad{std::move(dx), {}};
  grad.d_params.push_back({"weight", std::move(dw)});
  if (with_bias) {
    Tensor db(Shape{cout});
    const std::size_t positions = upstream.size() / cout;
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t o = 0; o < cout; ++o) db[o] += pg[p * cout + o];
    }
    grad.d_params.push_back({"bias", std::move(db)});
  }
  return grad;
}

BatchNormState BatchNormState::fresh(std::size_t channels) {
  return BatchNormState{Tensor(Shape{channels}, 1.0f), Tensor(Shape{channels}, 0.0f), Tensor(Shape{channels}, 0.0f),
                        Tensor(Shape{channels}, 1.0f)};
}

void BatchNormState::validate() const {
  const std::size_t c = gamma.size();
  if (gamma.rank() != 1 || beta.shape() != gamma.shape() || running_mean.shape() != gamma.shape() ||
      running_var.shape() != gamma.shape()) {
    throw ShapeError("batch norm state tensors must all be [" + std::to_string(c) + "]");
  }
  if (!(epsilon > 0.0f)) throw RangeError("batch norm epsilon must be positive");
  if (!(momentum > 0.0f && momentum < 1.0f)) throw RangeError("batch norm momentum must lie in (0, 1)");
  for (float v : running_var.data()) {
    if (v < 0.0f) throw RangeError("batch norm running variance is negative");
  }
}

Tensor batchnorm_forward(const Tensor& x, BatchNormState& state, Mode mode, BatchNormCache* cache) {
  state.validate();
  const std::size_t channels = state.channels();
  if (x.rank() < 2 || x.dim(x.rank() - 1) != channels) {
    throw ShapeError("batch norm: input " + x.shape().to_string() + " does not have " + std::to_string(channels) +
                     " channels");
  }
  const std::size_t rows = x.size() / channels;
  const float* px = x.raw();

  std::vector<double> mean(channels), var(channels);
  if (mode == Mode::train) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) mean[c] += px[r * channels + c];
    }
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double d = px[r * channels + c] - mean[c];
        var[c] += d * d;
      }
    }
    for (auto& v : var) v /= static_cast<double>(rows);
    const double mom = state.momentum;
    for (std::size_t c = 0; c < channels; ++c) {
      state.running_mean[c] = static_cast<float>((1.0 - mom) * state.running_mean[c] + mom * mean[c]);
      state.running_var[c] = static_cast<float>((1.0 - mom) * state.running_var[c] + mom * var[c]);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = state.running_mean[c];
      var[c] = state.running_var[c];
    }
  }

  std::vector<float> inv_std(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    inv_std[c] = static_cast<float>(1.0 / std::sqrt(var[c] + static_cast<double>(state.epsilon)));
  }

  Tensor y(x.shape());
  Tensor x_hat(x.shape());
  float* py = y.raw();
  float* ph = x_hat.raw();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      const float h = static_cast<float>((px[i] - mean[c]) * inv_std[c]);
      ph[i] = h;
      py[i] = state.gamma[c] * h + state.beta[c];
    }
  }
  y.require_finite("batch norm");
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return y;
}

LayerGrad batchnorm_backward(const BatchNormCache& cache, const BatchNormState& state, const Tensor& upstream) {
  const std::size_t channels = state.channels();
  if (upstream.shape() != cache.x_hat.shape()) {
    throw ShapeError("batch norm backward: upstream " + upstream.shape().to_string() + " vs input " +
                     cache.x_hat.shape().to_string());
  }
  const std::size_t rows = upstream.size() / channels;
  const float* pg = upstream.raw();
  const float* ph = cache.x_hat.raw();

  std::vector<double> sum_g(channels), sum_gh(channels);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      sum_g[c] += pg[i];
      sum_gh[c] += static_cast<double>(pg[i]) * ph[i];
    }
  }

  Tensor dx(upstream.shape());
  float* pdx = dx.raw();
  const double m = static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      const double scale = static_cast<double>(state.gamma[c]) * cache.inv_std[c];
      if (cache.mode == Mode::train) {
        pdx[i] = static_cast<float>(scale * (pg[i] - sum_g[c] / m - ph[i] * sum_gh[c] / m));
      } else {
        pdx[i] = static_cast<float>(scale * pg[i]);
      }
    }
  }

  Tensor dgamma(Shape{channels}), dbeta(Shape{channels});
  for (std::size_t c = 0; c < channels; ++c) {
    dgamma[c] = static_cast<float>(sum_gh[c]);
    dbeta[c] = static_cast<float>(sum_g[c]);
  }
  LayerGrad grad{std::move(dx), {}};
  grad.d_params.push_back({"gamma", std::move(dgamma)});
  grad.d_params.push_back({"beta", std::move(dbeta)});
  return grad;
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Activation act) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0) || b.rank() != 1 || b.size() != w.dim(1)) {
    throw ShapeError("dense: x " + x.shape().to_string() + ", W " + w.shape().to_string() + ", b " +
                     b.shape().to_string() + " are inconsistent");
  }
  Tensor y = add(matmul(x, w), b);
  activate_inplace(y, act);
  return y;
}

LayerGrad dense_backward(const Tensor& x, const Tensor& w, const Tensor& upstream) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0) || upstream.rank() != 2 ||
      upstream.dim(0) != x.dim(0) || upstream.dim(1) != w.dim(1)) {
    throw ShapeError("dense backward: x " + x.shape().to_string() + ", W " + w.shape().to_string() + ", upstream " +
                     upstream.shape().to_string() + " are inconsistent");
  }
  const std::size_t n = x.dim(0), d = x.dim(1), k = w.dim(1);
  Tensor dx(x.shape()), dw(w.shape()), db(Shape{k});
  const float* px = x.raw();
  const float* pw = w.raw();
  const float* pg = upstream.raw();
  for (std::size_t i = 0; i < n; ++i) {
    const float* g = pg + i * k;
    for (std::size_t j = 0; j < d; ++j) {
      const float xv = px[i * d + j];
      const float* wrow = pw + j * k;
      float* dwrow = dw.raw() + j * k;
      float acc = 0.0f;
      for (std::size_t o = 0; o < k; ++o) {
        dwrow[o] += xv * g[o];
        acc += wrow[o] * g[o];
      }
      dx[i * d + j] = acc;
    }
    for (std::size_t o = 0; o < k; ++o) db[o] += g[o];
  }
  LayerGrad grad{std::move(dx), {}};
  grad.d_params.push_back({"weight", std::move(dw)});
  grad.d_params.push_back({"bias", std::move(db)});
  return grad;
}

Tensor global_avg_pool_forward(const Tensor& x) {
  if (x.rank() != 4) throw ShapeError("global average pool: expected [N,H,W,C], got " + x.shape().to_string());
  const std::size_t n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  Tensor y(Shape{n, c});
  for (std::size_t b = 0; b < n; ++b) {
    const float* src = x.raw() + b * hw * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (std::size_t p = 0; p < hw; ++p) acc += src[p * c + ch];
      y[b * c + ch] = static_cast<float>(acc / static_cast<double>(hw));
    }
  }
  return y;
}

Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& upstream) {
  if (input_shape.rank() != 4 || upstream.shape() != Shape{input_shape[0], input_shape[3]}) {
    throw ShapeError("global average pool backward: input " + input_shape.to_string() + ", upstream " +
                     upstream.shape().to_string());
  }
  const std::size_t n = input_shape[0], hw = input_shape[1] * input_shape[2], c = input_shape[3];
  Tensor dx(input_shape);
  const float inv = 1.0f / static_cast<float>(hw);
  for (std::size_t b = 0; b < n; ++b) {
    float* dst = dx.raw() + b * hw * c;
    const float* g = upstream.raw() + b * c;
    for (std::size_t p = 0; p < hw; ++p) {
      for (std::size_t ch = 0; ch < c; ++ch) dst[p * c + ch] = g[ch] * inv;
    }
  }
  return dx;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) < 2) {
    throw ShapeError("softmax: expected [N,K] with K >= 2, got " + logits.shape().to_string());
  }
  logits.require_finite("softmax");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  Tensor probs(logits.shape());
  std::vector<double> e(k);
  for (std::size_t i = 0; i < n; ++i) {
    const float* z = logits.raw() + i * k;
    const double zmax = *std::max_element(z, z + k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      e[j] = std::exp(static_cast<double>(z[j]) - zmax);
      total += e[j];
    }
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] = static_cast<float>(e[j] / total);
  }
  return probs;
}

LossResult cross_entropy(const Tensor& probs, const Tensor& onehot, LossReduction reduction) {
  if (probs.rank() != 2 || probs.shape() != onehot.shape()) {
    throw ShapeError("cross entropy: probs " + probs.shape().to_string() + " vs labels " +
                     onehot.shape().to_string());
  }
  probs.require_finite("cross entropy");
  const std::size_t n = probs.dim(0), k = probs.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const float y = onehot[i * k + j];
      if (y == 1.0f) {
        ++ones;
        const double p = std::max(static_cast<double>(probs[i * k + j]), kProbabilityFloor);
        total -= std::log(p);
      } else if (y != 0.0f) {
        ones = 2;
      }
    }
    if (ones != 1) throw RangeError("cross entropy: label row " + std::to_string(i) + " is not one-hot");
  }
  const bool mean = reduction == LossReduction::mean;
  LossResult result;
  result.loss = mean ? total / static_cast<double>(n) : total;
  result.d_logits = sub(probs, onehot);
  if (mean) {
    const float inv = 1.0f / static_cast<float>(n);
    for (float& g : result.d_logits.data()) g *= inv;
  }
  return result;
}

}  // namespace sdl::nn
