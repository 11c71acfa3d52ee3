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

#ifndef CASANET_LAYERS_HPP_
#define CASANET_LAYERS_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "casanet/optim.hpp"
#include "casanet/rng.hpp"
#include "casanet/tensor.hpp"

namespace casanet {

// Xavier-uniform initialization: entries drawn from
// U(-a, a) with a = sqrt(6 / (rows + cols)).
Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);

// Elementwise max(0, x) and its gradient. relu_backward passes gradient
// through entries where the forward input was strictly positive.
Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

// Gradient of row-wise softmax: given S = softmax_rows(Z) and dL/dS,
// returns dL/dZ with dZ_ij = S_ij * (dS_ij - sum_k dS_ik * S_ik).
Tensor softmax_backward_rows(const Tensor& softmax_out, const Tensor& grad_out);

// Affine map y = x * W + b applied row-wise.
struct Linear {
  Parameter weight;  // [in_dim x out_dim]
  Parameter bias;    // [1 x out_dim], zero-initialized

  Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim,
         Rng& rng);

  std::size_t in_dim() const { return weight.value.dim(0); }
  std::size_t out_dim() const { return weight.value.dim(1); }

  Tensor forward(const Tensor& x) const;
  // Accumulates parameter gradients and returns the gradient w.r.t. x.
  Tensor backward(const Tensor& x, const Tensor& grad_out);
  void collect_parameters(std::vector<Parameter*>& out);
};

// Temporal convolution over rows with kernel size 3, stride 1 and zero
// padding, so the output has as many rows as the input. The weight stores
// the three taps stacked: rows [0, in) act on x[t-1], rows [in, 2*in) on
// x[t], rows [2*in, 3*in) on x[t+1].
struct Conv1d {
  Parameter weight;  // [3*in_dim x out_dim]
  Parameter bias;    // [1 x out_dim], zero-initialized

  Conv1d(const std::string& name, std::size_t in_dim, std::size_t out_dim,
         Rng& rng);

  std::size_t in_dim() const { return weight.value.dim(0) / 3; }
  std::size_t out_dim() const { return weight.value.dim(1); }

  struct Cache {
    Tensor unrolled;  // [T x 3*in_dim] shifted copies of the input
  };

  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Cache& cache, const Tensor& grad_out);
  void collect_parameters(std::vector<Parameter*>& out);
};

// Two-layer perceptron: Linear -> ReLU -> Linear.
struct FeedForward {
  Linear l1;
  Linear l2;

  FeedForward(const std::string& name, std::size_t in_dim, std::size_t hidden,
              std::size_t out_dim, Rng& rng);

  struct Cache {
    Tensor x;     // layer input
    Tensor pre1;  // first-layer pre-activation
  };

  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Cache& cache, const Tensor& grad_out);
  void collect_parameters(std::vector<Parameter*>& out);
};

// Scaled dot-product multi-head attention over rows (one row per frame).
// Queries come from one stream, keys and values from another; the two may
// be the same tensor for self-attention. Projections are bias-free:
//   Q = x_q W_Q, K = x_kv W_K, V = x_kv W_V, each [rows x d_model];
// each head takes a d_model/heads wide slice, attends with scale
// 1/sqrt(d_model/heads), and the concatenated head outputs go through W_O.
struct MultiHeadAttention {
  Parameter w_q;  // [query_dim x d_model]
  Parameter w_k;  // [kv_dim x d_model]
  Parameter w_v;  // [kv_dim x d_model]
  Parameter w_o;  // [d_model x out_dim]
  std::size_t heads;

  MultiHeadAttention(const std::string& name, std::size_t query_dim,
                     std::size_t kv_dim, std::size_t d_model,
                     std::size_t heads, std::size_t out_dim, Rng& rng);

  std::size_t d_model() const { return w_q.value.dim(1); }
  std::size_t head_dim() const { return d_model() / heads; }

  struct Cache {
    Tensor q;                     // [T_q x d_model]
    Tensor k;                     // [T_kv x d_model]
    Tensor v;                     // [T_kv x d_model]
    std::vector<Tensor> weights;  // per head, [T_q x T_kv], rows sum to 1
    Tensor context;               // [T_q x d_model]
  };

  Tensor forward(const Tensor& query_x, const Tensor& kv_x,
                 Cache* cache = nullptr) const;
  // Returns {grad wrt query_x, grad wrt kv_x}. For self-attention the
  // caller must add both to the shared input gradient.
  std::pair<Tensor, Tensor> backward(const Tensor& query_x,
                                     const Tensor& kv_x, const Cache& cache,
                                     const Tensor& grad_out);
  void collect_parameters(std::vector<Parameter*>& out);
};

}  // namespace casanet

#endif  // CASANET_LAYERS_HPP_
