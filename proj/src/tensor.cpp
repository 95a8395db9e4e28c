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

#include "sdl/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "sdl/errors.hpp"

namespace sdl {

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

void Shape::validate() const {
  for (std::size_t d : dims_) {
    if (d == 0) throw ShapeError("shape " + to_string() + " has a zero dimension");
  }
}

std::size_t Shape::numel() const {
  return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

std::string Shape::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ',';
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor of shape " + shape_.to_string() + " needs " + std::to_string(shape_.numel()) +
                     " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::scalar(float value) { return Tensor(Shape{}, value); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0f;
  return t;
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.rank()) {
    throw ShapeError("index of rank " + std::to_string(index.size()) + " into tensor " + shape_.to_string());
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw ShapeError("index out of range for tensor " + shape_.to_string());
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

float& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
float Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != shape_.numel()) {
    throw ShapeError("cannot reshape " + shape_.to_string() + " to " + shape.to_string());
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(const char* context) const {
  if (!all_finite()) throw NumericError(std::string(context) + ": non-finite value in tensor " + shape_.to_string());
}

namespace {

float apply(ElementwiseOp op, float x, float y) {
  switch (op) {
    case ElementwiseOp::add: return x + y;
    case ElementwiseOp::sub: return x - y;
    case ElementwiseOp::mul: return x * y;
  }
  return 0.0f;
}

}  // namespace

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
  Tensor out(a.shape());
  const auto x = a.data();
  const auto y = b.data();
  auto z = out.data();
  if (b.shape() == a.shape()) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = apply(op, x[i], y[i]);
  } else if (b.size() == 1) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = apply(op, x[i], y[0]);
  } else if (b.rank() == 1 && a.rank() >= 1 && a.dim(a.rank() - 1) == b.size()) {
    const std::size_t inner = b.size();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = apply(op, x[i], y[i % inner]);
  } else {
    throw ShapeError("elementwise shape mismatch: " + a.shape().to_string() + " vs " + b.shape().to_string());
  }
  out.require_finite("elementwise");
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + a.shape().to_string() + " x " + b.shape().to_string());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out(Shape{m, n});
  const float* pa = a.raw();
  const float* pb = b.raw();
  float* pc = out.raw();
  for (std::size_t i = 0; i < m; ++i) {
    float* row = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float s = pa[i * k + p];
      const float* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  out.require_finite("matmul");
  return out;
}

Tensor reduce(ReduceOp op, const Tensor& t, std::size_t axis) {
  if (axis >= t.rank()) {
    throw AxisError("axis " + std::to_string(axis) + " out of range for tensor " + t.shape().to_string());
  }
  const auto& dims = t.shape().dims();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= dims[i];
  for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i];
  const std::size_t len = dims[axis];

  std::vector<std::size_t> out_dims;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i != axis) out_dims.push_back(dims[i]);
  }
  Tensor out{Shape(out_dims)};
  const float* src = t.raw();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const float* base = src + o * len * inner + in;
      float result = 0.0f;
      switch (op) {
        case ReduceOp::sum:
        case ReduceOp::mean: {
          double acc = 0.0;
          for (std::size_t i = 0; i < len; ++i) acc += base[i * inner];
          if (op == ReduceOp::mean) acc /= static_cast<double>(len);
          result = static_cast<float>(acc);
          break;
        }
        case ReduceOp::max:
        case ReduceOp::argmax: {
          std::size_t best = 0;
          for (std::size_t i = 1; i < len; ++i) {
            if (base[i * inner] > base[best * inner]) best = i;
          }
          result = op == ReduceOp::max ? base[best * inner] : static_cast<float>(best);
          break;
        }
      }
      out[o * inner + in] = result;
    }
  }
  out.require_finite("reduce");
  return out;
}

}  // namespace sdl
