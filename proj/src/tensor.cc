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

#include "stylerl/tensor.h"

#include <algorithm>
#include <sstream>
#include <utility>

#include "stylerl/errors.h"

namespace stylerl {

size_t ShapeSize(const Shape &shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("non-positive dimension in shape " + ShapeString(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::string ShapeString(const Shape &shape) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << ",";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (ShapeSize(shape_) != data_.size()) {
    throw DimensionError("tensor of shape " + stylerl::ShapeString(shape_) +
                         " given " + std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Identity(int n) {
  Tensor t({n, n});
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item() on tensor of shape " + ShapeString());
  }
  return data_[0];
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::Reshape(Shape shape) {
  if (ShapeSize(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + ShapeString() + " to " +
                         stylerl::ShapeString(shape));
  }
  shape_ = std::move(shape);
}

Parameter::Parameter(std::string name, Tensor value)
    : name(std::move(name)), value(std::move(value)) {
  grad = Tensor(this->value.shape());
}

}  // namespace stylerl
