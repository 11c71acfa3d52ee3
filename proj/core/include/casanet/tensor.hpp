// Copyright 2026 The CasaNet Authors
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

#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

namespace casanet {

// Dense row-major tensor of 64-bit floats. Tensors are plain values;
// every op allocates its result and sums strictly left-to-right, so
// results are bit-reproducible across runs.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor full(std::vector<std::size_t> shape, double value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;  // e.g. "[3 x 4]"

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) {
    assert(rank() == 2 && i < shape_[0] && j < shape_[1]);
    return data_[i * shape_[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    assert(rank() == 2 && i < shape_[0] && j < shape_[1]);
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    assert(rank() == 3 && i < shape_[0] && j < shape_[1] && k < shape_[2]);
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    assert(rank() == 3 && i < shape_[0] && j < shape_[1] && k < shape_[2]);
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool all_finite() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// --- matrix ops (rank-2 operands) ---

// Standard matrix product [M x K] * [K x P] -> [M x P]; throws on an
// inner-dimension mismatch naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transposed(const Tensor& m);

// Row-wise softmax, stabilized by row-max subtraction. Each output row
// is non-negative and sums to 1 within 1e-12.
Tensor softmax_rows(const Tensor& x);

// Concatenate two matrices with equal row counts along the column axis.
Tensor concat_cols(const Tensor& a, const Tensor& b);

// Copy columns [begin, begin + count) of a matrix.
Tensor slice_cols(const Tensor& m, std::size_t begin, std::size_t count);

// --- elementwise ops (shapes must match) ---

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scaled(const Tensor& a, double factor);
void add_in_place(Tensor& a, const Tensor& b);
void scale_in_place(Tensor& a, double factor);

}  // namespace casanet
