// Copyright 2026 The kscore Authors
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

#ifndef KSCORE_MATRIX_HPP
#define KSCORE_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace kscore {

/// Dense row-major matrix of doubles. Rows are observations, columns are
/// coordinates; this is the exchange format for samples and point sets.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Builds a column vector (n x 1) from scalar values.
  static Matrix column(std::span<const double> values) {
    Matrix m(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m.data_[i] = values[i];
    return m;
  }

  static Matrix column(std::initializer_list<double> values) {
    return column(std::span<const double>(values.begin(), values.size()));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

inline void require_same_dim(std::span<const double> x,
                             std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("dimension mismatch");
  }
}

}  // namespace kscore

#endif  // KSCORE_MATRIX_HPP
