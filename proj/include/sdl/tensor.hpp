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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sdl {

// Ordered list of dimensions. Rank 0 denotes a scalar with one element.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t i) const { return dims_.at(i); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t numel() const;

  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  void validate() const;

  std::vector<std::size_t> dims_;
};

// Dense row-major float32 tensor, last dimension fastest. Images use [N, H, W, C].
class Tensor {
 public:
  Tensor() : data_(1, 0.0f) {}
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor scalar(float value);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t rank() const { return shape_.rank(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float* raw() { return data_.data(); }
  const float* raw() const { return data_.data(); }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // Bounds-checked multi-index access.
  float& at(std::initializer_list<std::size_t> index);
  float at(std::initializer_list<std::size_t> index) const;

  Tensor reshaped(Shape shape) const;
  void fill(float value);

  bool all_finite() const;
  // Throws NumericError naming `context` if any element is NaN or infinite.
  void require_finite(const char* context) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<float> data_;
};

enum class ElementwiseOp { add, sub, mul };
enum class ReduceOp { sum, mean, max, argmax };

// `b` must have a's shape, be a single-element tensor, or be rank 1 with
// length equal to a's last dimension (broadcast along the last axis).
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b);
inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::mul, a, b); }

// [M, K] x [K, N]. Each output element accumulates over K left to right.
Tensor matmul(const Tensor& a, const Tensor& b);

// Drops `axis`. argmax returns indices as floats and resolves ties toward the
// lowest index.
Tensor reduce(ReduceOp op, const Tensor& t, std::size_t axis);

}  // namespace sdl
