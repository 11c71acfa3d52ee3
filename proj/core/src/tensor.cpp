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

#include "casanet/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace casanet {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw std::runtime_error("Tensor: zero dimension in shape");
    n *= d;
  }
  return n;
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw std::runtime_error(std::string(op) + ": expected a rank-2 tensor, got " + t.shape_str());
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::runtime_error(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw std::runtime_error("Tensor: data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str());
  }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  for (double& x : t.data_) x = value;
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::runtime_error("Tensor::dim: axis " + std::to_string(axis) + " out of range for " + shape_str());
  }
  return shape_[axis];
}

std::string Tensor::shape_str() const {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << " x ";
    out << shape_[i];
  }
  out << "]";
  return out.str();
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw std::runtime_error("matmul: inner dimensions differ, " + a.shape_str() + " vs " + b.shape_str());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
  Tensor out({m, p});
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  // i-k-j order: cache friendly and still accumulates each cell in
  // ascending k, so sums stay left-to-right.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = pa[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = pb + kk * p;
      double* orow = po + i * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Tensor transposed(const Tensor& m) {
  require_matrix(m, "transposed");
  const std::size_t r = m.dim(0), c = m.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = m.at(i, j);
  }
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    double row_max = x.at(i, 0);
    for (std::size_t j = 1; j < cols; ++j) row_max = std::max(row_max, x.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = std::exp(x.at(i, j) - row_max);
      out.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) /= sum;
  }
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_matrix(a, "concat_cols");
  require_matrix(b, "concat_cols");
  if (a.dim(0) != b.dim(0)) {
    throw std::runtime_error("concat_cols: row counts differ, " + a.shape_str() + " vs " + b.shape_str());
  }
  const std::size_t rows = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  Tensor out({rows, ca + cb});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = b.at(i, j);
  }
  return out;
}

Tensor slice_cols(const Tensor& m, std::size_t begin, std::size_t count) {
  require_matrix(m, "slice_cols");
  if (begin + count > m.dim(1)) {
    throw std::runtime_error("slice_cols: columns [" + std::to_string(begin) + ", " +
                             std::to_string(begin + count) + ") out of range for " + m.shape_str());
  }
  const std::size_t rows = m.dim(0);
  Tensor out({rows, count});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < count; ++j) out.at(i, j) = m.at(i, begin + j);
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scaled(const Tensor& a, double factor) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
  return out;
}

void add_in_place(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void scale_in_place(Tensor& a, double factor) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= factor;
}

}  // namespace casanet
