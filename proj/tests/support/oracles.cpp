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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sdl::testing {

std::vector<double> to_double(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Tensor random_tensor(Shape shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

std::vector<double> naive_matmul(std::span<const double> a, std::span<const double> b, std::size_t m, std::size_t k,
                                 std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

std::vector<double> naive_conv(const ConvDims& d, std::span<const double> x, std::span<const double> w,
                               std::span<const double> b, std::size_t& out_h, std::size_t& out_w) {
  std::size_t pad_t = 0, pad_l = 0;
  if (d.same) {
    out_h = (d.h + d.sh - 1) / d.sh;
    out_w = (d.w + d.sw - 1) / d.sw;
    const long total_h = std::max<long>(0, static_cast<long>((out_h - 1) * d.sh + d.kh) - static_cast<long>(d.h));
    const long total_w = std::max<long>(0, static_cast<long>((out_w - 1) * d.sw + d.kw) - static_cast<long>(d.w));
    pad_t = static_cast<std::size_t>(total_h / 2);
    pad_l = static_cast<std::size_t>(total_w / 2);
  } else {
    out_h = (d.h - d.kh) / d.sh + 1;
    out_w = (d.w - d.kw) / d.sw + 1;
  }
  const std::size_t mult = d.depthwise ? d.cout / d.cin : 0;
  std::vector<double> y(d.n * out_h * out_w * d.cout, 0.0);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t oh = 0; oh < out_h; ++oh)
      for (std::size_t ow = 0; ow < out_w; ++ow)
        for (std::size_t o = 0; o < d.cout; ++o) {
          double acc = b.empty() ? 0.0 : b[o];
          for (std::size_t i = 0; i < d.kh; ++i)
            for (std::size_t j = 0; j < d.kw; ++j) {
              const long ih = static_cast<long>(oh * d.sh + i) - static_cast<long>(pad_t);
              const long iw = static_cast<long>(ow * d.sw + j) - static_cast<long>(pad_l);
              if (ih < 0 || iw < 0 || ih >= static_cast<long>(d.h) || iw >= static_cast<long>(d.w)) continue;
              const std::size_t base = ((n * d.h + static_cast<std::size_t>(ih)) * d.w + static_cast<std::size_t>(iw)) * d.cin;
              if (d.depthwise) {
                const std::size_t c = o / mult, m = o % mult;
                acc += x[base + c] * w[((i * d.kw + j) * d.cin + c) * mult + m];
              } else {
                for (std::size_t c = 0; c < d.cin; ++c) acc += x[base + c] * w[((i * d.kw + j) * d.cin + c) * d.cout + o];
              }
            }
          y[((n * out_h + oh) * out_w + ow) * d.cout + o] = acc;
        }
  return y;
}

std::vector<double> naive_batchnorm_train(std::span<const double> x, std::size_t channels,
                                          std::span<const double> gamma, std::span<const double> beta, double eps) {
  const std::size_t rows = x.size() / channels;
  std::vector<double> y(x.size());
  for (std::size_t c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mean += x[r * channels + c];
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (std::size_t r = 0; r < rows; ++r) var += (x[r * channels + c] - mean) * (x[r * channels + c] - mean);
    var /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      y[r * channels + c] = gamma[c] * (x[r * channels + c] - mean) / std::sqrt(var + eps) + beta[c];
    }
  }
  return y;
}

std::vector<double> naive_softmax_row(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += (p[i] = std::exp(z[i] - zmax));
  for (double& v : p) v /= total;
  return p;
}

double naive_mean_cross_entropy(std::span<const double> logits, std::span<const std::size_t> labels, std::size_t k) {
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto p = naive_softmax_row(logits.subspan(i * k, k));
    loss -= std::log(p[labels[i]]);
  }
  return loss / static_cast<double>(labels.size());
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max(scale, std::abs(numeric[i]));
  }
  if (scale == 0.0) return diff;
  return diff / scale;
}

namespace {

double weighted_sum(std::span<const double> r, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
  return s;
}

}  // namespace

double gradcheck_conv(std::uint64_t seed, bool depthwise) {
  Rng rng(derive_seed({seed, 0xc0ffULL, depthwise ? 1u : 0u}));
  ConvDims d{};
  d.n = 1 + rng.below(2);
  d.h = 3 + rng.below(4);
  d.w = 3 + rng.below(4);
  d.cin = 1 + rng.below(3);
  d.cout = depthwise ? d.cin * (1 + rng.below(2)) : 1 + rng.below(4);
  const std::size_t kernels[] = {1, 3, 5};
  d.kh = d.kw = kernels[rng.below(3)];
  d.sh = d.sw = 1 + rng.below(2);
  d.same = d.kh > std::min(d.h, d.w) || rng.bernoulli(0.5);
  d.depthwise = depthwise;

  nn::ConvSpec spec{d.cin, d.cout, d.kh, d.kw, d.sh, d.sw, d.same ? nn::Padding::same : nn::Padding::valid, depthwise};
  const Tensor x = random_tensor(Shape{d.n, d.h, d.w, d.cin}, rng);
  const Tensor w = random_tensor(spec.weight_shape(), rng);
  const Tensor b = random_tensor(Shape{d.cout}, rng);
  std::size_t oh = 0, ow = 0;
  const auto xd = to_double(x), wd = to_double(w), bd = to_double(b);
  const std::size_t out_size = naive_conv(d, xd, wd, bd, oh, ow).size();
  const Tensor r = random_tensor(Shape{d.n, oh, ow, d.cout}, rng);
  const auto rd = to_double(r);
  (void)out_size;

  const nn::LayerGrad g = nn::conv2d_backward(x, spec, w, r, true);
  std::size_t h1 = 0, w1 = 0;
  const auto fx = [&](const std::vector<double>& v) { return weighted_sum(rd, naive_conv(d, v, wd, bd, h1, w1)); };
  const auto fw = [&](const std::vector<double>& v) { return weighted_sum(rd, naive_conv(d, xd, v, bd, h1, w1)); };
  const auto fb = [&](const std::vector<double>& v) { return weighted_sum(rd, naive_conv(d, xd, wd, v, h1, w1)); };
  double err = max_relative_error(to_double(g.d_input), numeric_gradient(fx, xd));
  err = std::max(err, max_relative_error(to_double(g.param("weight")), numeric_gradient(fw, wd)));
  err = std::max(err, max_relative_error(to_double(g.param("bias")), numeric_gradient(fb, bd)));
  return err;
}

double gradcheck_batchnorm(std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0xb40ULL}));
  // At least 4 rows per channel: with 2 rows the output is +-gamma whatever x is,
  // the true input gradient is O(eps), and float rounding dominates the ratio.
  const std::size_t n = 2 + rng.below(3), h = 1 + rng.below(3), w = 2 + rng.below(2), c = 1 + rng.below(4);
  const Tensor x = random_tensor(Shape{n, h, w, c}, rng, -2.0, 2.0);
  nn::BatchNormState state = nn::BatchNormState::fresh(c);
  state.gamma = random_tensor(Shape{c}, rng, 0.5, 1.5);
  state.beta = random_tensor(Shape{c}, rng);
  state.running_mean = random_tensor(Shape{c}, rng, -0.5, 0.5);
  state.running_var = random_tensor(Shape{c}, rng, 0.5, 2.0);
  const Tensor r = random_tensor(x.shape(), rng);
  const auto xd = to_double(x), gd = to_double(state.gamma), bd = to_double(state.beta), rd = to_double(r);
  const auto md = to_double(state.running_mean), vd = to_double(state.running_var);
  const double eps = state.epsilon;

  double err = 0.0;
  for (nn::Mode mode : {nn::Mode::train, nn::Mode::eval}) {
    nn::BatchNormState s = state;
    nn::BatchNormCache cache;
    nn::batchnorm_forward(x, s, mode, &cache);
    const nn::LayerGrad g = nn::batchnorm_backward(cache, state, r);

    auto forward = [&](const std::vector<double>& xv, const std::vector<double>& gv, const std::vector<double>& bv) {
      if (mode == nn::Mode::train) return naive_batchnorm_train(xv, c, gv, bv, eps);
      std::vector<double> y(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const std::size_t ch = i % c;
        y[i] = gv[ch] * (xv[i] - md[ch]) / std::sqrt(vd[ch] + eps) + bv[ch];
      }
      return y;
    };
    const auto fx = [&](const std::vector<double>& v) { return weighted_sum(rd, forward(v, gd, bd)); };
    const auto fg = [&](const std::vector<double>& v) { return weighted_sum(rd, forward(xd, v, bd)); };
    const auto fb = [&](const std::vector<double>& v) { return weighted_sum(rd, forward(xd, gd, v)); };
    err = std::max(err, max_relative_error(to_double(g.d_input), numeric_gradient(fx, xd)));
    err = std::max(err, max_relative_error(to_double(g.param("gamma")), numeric_gradient(fg, gd)));
    err = std::max(err, max_relative_error(to_double(g.param("beta")), numeric_gradient(fb, bd)));
  }
  return err;
}

double gradcheck_dense(std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0xde45eULL}));
  const std::size_t n = 1 + rng.below(4), d = 1 + rng.below(6), k = 1 + rng.below(5);
  const Tensor x = random_tensor(Shape{n, d}, rng);
  const Tensor w = random_tensor(Shape{d, k}, rng);
  const Tensor b = random_tensor(Shape{k}, rng);
  const Tensor r = random_tensor(Shape{n, k}, rng);
  const auto xd = to_double(x), wd = to_double(w), bd = to_double(b), rd = to_double(r);
  auto forward = [&](const std::vector<double>& xv, const std::vector<double>& wv, const std::vector<double>& bv) {
    auto y = naive_matmul(xv, wv, n, d, k);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i % k];
    return weighted_sum(rd, y);
  };
  const nn::LayerGrad g = nn::dense_backward(x, w, r);
  double err = max_relative_error(to_double(g.d_input),
                                  numeric_gradient([&](const auto& v) { return forward(v, wd, bd); }, xd));
  err = std::max(err, max_relative_error(to_double(g.param("weight")),
                                         numeric_gradient([&](const auto& v) { return forward(xd, v, bd); }, wd)));
  err = std::max(err, max_relative_error(to_double(g.param("bias")),
                                         numeric_gradient([&](const auto& v) { return forward(xd, wd, v); }, bd)));
  return err;
}

double gradcheck_softmax_cross_entropy(std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x50f7ULL}));
  const std::size_t n = 1 + rng.below(4), k = 2 + rng.below(4);
  const Tensor z = random_tensor(Shape{n, k}, rng, -3.0, 3.0);
  std::vector<std::size_t> labels(n);
  Tensor onehot(Shape{n, k});
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = rng.below(k);
    onehot[i * k + labels[i]] = 1.0f;
  }
  const nn::LossResult loss = nn::cross_entropy(nn::softmax(z), onehot);
  const auto numeric =
      numeric_gradient([&](const std::vector<double>& v) { return naive_mean_cross_entropy(v, labels, k); }, to_double(z));
  return max_relative_error(to_double(loss.d_logits), numeric);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

double t_pdf(double t, double df) {
  const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(t * t / df));
}

double t_cdf_quadrature(double t, double df) {
  const double half = adaptive_simpson([df](double u) { return t_pdf(u, df); }, 0.0, std::abs(t));
  return t >= 0.0 ? 0.5 + half : 0.5 - half;
}

std::vector<RecountedClass> recount_metrics(std::span<const std::size_t> actual,
                                            std::span<const std::size_t> predicted, std::size_t k) {
  std::vector<RecountedClass> out;
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
      const bool is_c = actual[i] == c, said_c = predicted[i] == c;
      tp += is_c && said_c;
      fn += is_c && !said_c;
      fp += !is_c && said_c;
      tn += !is_c && !said_c;
    }
    RecountedClass r{};
    const std::uint64_t all = tp + tn + fp + fn;
    r.accuracy = all ? static_cast<double>(tp + tn) / static_cast<double>(all) : 0.0;
    r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    r.support = tp + fn;
    out.push_back(r);
  }
  return out;
}

}  // namespace sdl::testing
