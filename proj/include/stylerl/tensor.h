// Copyright 2026 The StyleRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STYLERL_TENSOR_H_
#define STYLERL_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stylerl {

using Shape = std::vector<int>;

// Number of elements described by a shape. Throws DimensionError on
// non-positive dimensions.
size_t ShapeSize(const Shape &shape);
std::string ShapeString(const Shape &shape);

// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double value);
  static Tensor Identity(int n);

  const Shape &shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_[axis]; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // 2-D convenience accessors.
  int rows() const { return shape_[0]; }
  int cols() const { return static_cast<int>(data_.size() / shape_[0]); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double &operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double &at(int r, int c) { return data_[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols() + c];
  }

  // Value of a single-element tensor.
  double item() const;

  void Fill(double value);
  // Same storage, new shape with equal element count.
  void Reshape(Shape shape);

  std::string ShapeString() const { return stylerl::ShapeString(shape_); }

  bool operator==(const Tensor &other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// A trainable tensor: value plus an accumulated gradient of the same shape.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void ZeroGrad() { grad.Fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

}  // namespace stylerl

#endif  // STYLERL_TENSOR_H_
