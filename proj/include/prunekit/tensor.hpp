// Copyright 2026 The prunekit Authors. All Rights Reserved.
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

#ifndef PRUNEKIT_TENSOR_HPP
#define PRUNEKIT_TENSOR_HPP

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prunekit {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>{});
}

std::string to_string(const Shape& shape);

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
template <typename Scalar>
using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Dense row-major n-d array. Storage is an Eigen column vector so whole
// tensor arithmetic stays in Eigen expressions; 2-d views are row-major maps.
template <typename Scalar>
class TensorT {
 public:
  using value_type = Scalar;

  TensorT() = default;

  explicit TensorT(Shape shape) : shape_(std::move(shape)), data_(Vector<Scalar>::Zero(shape_size(shape_))) {
    check_dims();
  }

  TensorT(Shape shape, Vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + to_string(shape_));
    }
  }

  TensorT(Shape shape, std::initializer_list<Scalar> values)
      : TensorT(std::move(shape), Eigen::Map<const Vector<Scalar>>(values.begin(), static_cast<Index>(values.size()))) {}

  static TensorT constant(Shape shape, Scalar value) {
    TensorT t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Vector<Scalar>& vec() { return data_; }
  const Vector<Scalar>& vec() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::span<Scalar> values() { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<const Scalar> values() const { return {data_.data(), static_cast<std::size_t>(data_.size())}; }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  // Row-major 2-d view; rows * cols must equal size().
  MatrixMap<Scalar> matrix(Index rows, Index cols) {
    check_view(rows, cols);
    return {data_.data(), rows, cols};
  }
  ConstMatrixMap<Scalar> matrix(Index rows, Index cols) const {
    check_view(rows, cols);
    return {data_.data(), rows, cols};
  }
  // View with the leading axis as rows and everything else flattened.
  MatrixMap<Scalar> matrix() { return matrix(dim(0), size() / dim(0)); }
  ConstMatrixMap<Scalar> matrix() const { return matrix(dim(0), size() / dim(0)); }

  TensorT reshaped(Shape shape) const {
    if (shape_size(shape) != size()) {
      throw std::invalid_argument("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    return TensorT(std::move(shape), data_);
  }

  template <typename To>
  TensorT<To> cast() const {
    return TensorT<To>(shape_, data_.template cast<To>());
  }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const TensorT& a, const TensorT& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_dims() const {
    for (Index d : shape_) {
      if (d < 1) throw std::invalid_argument("tensor dimensions must be positive, got " + to_string(shape_));
    }
  }
  void check_view(Index rows, Index cols) const {
    if (rows * cols != size()) {
      throw std::invalid_argument("matrix view " + std::to_string(rows) + "x" + std::to_string(cols) +
                                  " does not fit tensor of shape " + to_string(shape_));
    }
  }

  Shape shape_;
  Vector<Scalar> data_;
};

using Tensor = TensorT<float>;

}  // namespace prunekit

#endif  // PRUNEKIT_TENSOR_HPP
