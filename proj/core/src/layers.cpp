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

#include "casanet/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace casanet {

Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor out({rows, cols});
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.data()[i] < 0.0) out.data()[i] = 0.0;
  }
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape()) {
    throw std::invalid_argument("relu_backward: shape mismatch");
  }
  Tensor out = grad_out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (x.data()[i] <= 0.0) out.data()[i] = 0.0;
  }
  return out;
}

Tensor softmax_backward_rows(const Tensor& softmax_out,
                             const Tensor& grad_out) {
  if (softmax_out.shape() != grad_out.shape() ||
      softmax_out.shape().size() != 2) {
    throw std::invalid_argument("softmax_backward_rows: shape mismatch");
  }
  const std::size_t rows = softmax_out.dim(0);
  const std::size_t cols = softmax_out.dim(1);
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      dot += grad_out.at(i, j) * softmax_out.at(i, j);
    }
    for (std::size_t j = 0; j < cols; ++j) {
      out.at(i, j) = softmax_out.at(i, j) * (grad_out.at(i, j) - dot);
    }
  }
  return out;
}

Linear::Linear(const std::string& name, std::size_t in_dim,
               std::size_t out_dim, Rng& rng)
    : weight(name + ".weight", xavier_uniform(in_dim, out_dim, rng)),
      bias(name + ".bias", Tensor({1, out_dim})) {}

Tensor Linear::forward(const Tensor& x) const {
  if (x.dim(1) != in_dim()) {
    throw std::invalid_argument("linear: input has " +
                                std::to_string(x.dim(1)) +
                                " features, layer expects " +
                                std::to_string(in_dim()));
  }
  Tensor out = matmul(x, weight.value);
  for (std::size_t i = 0; i < out.dim(0); ++i) {
    for (std::size_t j = 0; j < out.dim(1); ++j) {
      out.at(i, j) += bias.value.at(0, j);
    }
  }
  return out;
}

Tensor Linear::backward(const Tensor& x, const Tensor& grad_out) {
  if (grad_out.dim(0) != x.dim(0) || grad_out.dim(1) != out_dim()) {
    throw std::invalid_argument("linear backward: gradient shape mismatch");
  }
  add_in_place(weight.grad, matmul(transposed(x), grad_out));
  for (std::size_t i = 0; i < grad_out.dim(0); ++i) {
    for (std::size_t j = 0; j < grad_out.dim(1); ++j) {
      bias.grad.at(0, j) += grad_out.at(i, j);
    }
  }
  return matmul(grad_out, transposed(weight.value));
}

void Linear::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Conv1d::Conv1d(const std::string& name, std::size_t in_dim,
               std::size_t out_dim, Rng& rng)
    : weight(name + ".weight", xavier_uniform(3 * in_dim, out_dim, rng)),
      bias(name + ".bias", Tensor({1, out_dim})) {}

Tensor Conv1d::forward(const Tensor& x, Cache* cache) const {
  if (x.dim(1) != in_dim()) {
    throw std::invalid_argument("conv1d: input has " +
                                std::to_string(x.dim(1)) +
                                " features, layer expects " +
                                std::to_string(in_dim()));
  }
  const std::size_t frames = x.dim(0);
  if (frames < 3) {
    throw std::invalid_argument("conv1d: input has " + std::to_string(frames) +
                                " frames, kernel needs at least 3");
  }
  const std::size_t in = in_dim();
  Tensor unrolled({frames, 3 * in});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t tap = 0; tap < 3; ++tap) {
      // tap 0 reads x[t-1], tap 1 reads x[t], tap 2 reads x[t+1].
      const std::ptrdiff_t src =
          static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(tap) - 1;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(frames)) continue;
      for (std::size_t c = 0; c < in; ++c) {
        unrolled.at(t, tap * in + c) =
            x.at(static_cast<std::size_t>(src), c);
      }
    }
  }
  Tensor out = matmul(unrolled, weight.value);
  for (std::size_t i = 0; i < out.dim(0); ++i) {
    for (std::size_t j = 0; j < out.dim(1); ++j) {
      out.at(i, j) += bias.value.at(0, j);
    }
  }
  if (cache != nullptr) cache->unrolled = std::move(unrolled);
  return out;
}

Tensor Conv1d::backward(const Cache& cache, const Tensor& grad_out) {
  const std::size_t frames = cache.unrolled.dim(0);
  const std::size_t in = in_dim();
  if (grad_out.dim(0) != frames || grad_out.dim(1) != out_dim()) {
    throw std::invalid_argument("conv1d backward: gradient shape mismatch");
  }
  add_in_place(weight.grad, matmul(transposed(cache.unrolled), grad_out));
  for (std::size_t i = 0; i < grad_out.dim(0); ++i) {
    for (std::size_t j = 0; j < grad_out.dim(1); ++j) {
      bias.grad.at(0, j) += grad_out.at(i, j);
    }
  }
  const Tensor grad_unrolled = matmul(grad_out, transposed(weight.value));
  Tensor grad_x({frames, in});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t tap = 0; tap < 3; ++tap) {
      const std::ptrdiff_t src =
          static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(tap) - 1;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(frames)) continue;
      for (std::size_t c = 0; c < in; ++c) {
        grad_x.at(static_cast<std::size_t>(src), c) +=
            grad_unrolled.at(t, tap * in + c);
      }
    }
  }
  return grad_x;
}

void Conv1d::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

FeedForward::FeedForward(const std::string& name, std::size_t in_dim,
                         std::size_t hidden, std::size_t out_dim, Rng& rng)
    : l1(name + ".l1", in_dim, hidden, rng),
      l2(name + ".l2", hidden, out_dim, rng) {}

Tensor FeedForward::forward(const Tensor& x, Cache* cache) const {
  Tensor pre1 = l1.forward(x);
  Tensor out = l2.forward(relu(pre1));
  if (cache != nullptr) {
    cache->x = x;
    cache->pre1 = std::move(pre1);
  }
  return out;
}

Tensor FeedForward::backward(const Cache& cache, const Tensor& grad_out) {
  const Tensor act1 = relu(cache.pre1);
  const Tensor grad_act1 = l2.backward(act1, grad_out);
  const Tensor grad_pre1 = relu_backward(cache.pre1, grad_act1);
  return l1.backward(cache.x, grad_pre1);
}

void FeedForward::collect_parameters(std::vector<Parameter*>& out) {
  l1.collect_parameters(out);
  l2.collect_parameters(out);
}

MultiHeadAttention::MultiHeadAttention(const std::string& name,
                                       std::size_t query_dim,
                                       std::size_t kv_dim, std::size_t d_model,
                                       std::size_t heads_in,
                                       std::size_t out_dim, Rng& rng)
    : w_q(name + ".w_q", xavier_uniform(query_dim, d_model, rng)),
      w_k(name + ".w_k", xavier_uniform(kv_dim, d_model, rng)),
      w_v(name + ".w_v", xavier_uniform(kv_dim, d_model, rng)),
      w_o(name + ".w_o", xavier_uniform(d_model, out_dim, rng)),
      heads(heads_in) {
  if (heads == 0 || d_model % heads != 0) {
    throw std::invalid_argument(
        "attention: d_model " + std::to_string(d_model) +
        " not divisible by head count " + std::to_string(heads));
  }
}

namespace {

// Copies columns [head*width, (head+1)*width) into a dense matrix.
Tensor head_slice(const Tensor& x, std::size_t head, std::size_t width) {
  return slice_cols(x, head * width, width);
}

}  // namespace

Tensor MultiHeadAttention::forward(const Tensor& query_x, const Tensor& kv_x,
                                   Cache* cache) const {
  if (query_x.dim(1) != w_q.value.dim(0)) {
    throw std::invalid_argument(
        "attention: query stream has " + std::to_string(query_x.dim(1)) +
        " features, W_Q expects " + std::to_string(w_q.value.dim(0)));
  }
  if (kv_x.dim(1) != w_k.value.dim(0)) {
    throw std::invalid_argument(
        "attention: key/value stream has " + std::to_string(kv_x.dim(1)) +
        " features, W_K expects " + std::to_string(w_k.value.dim(0)));
  }
  const std::size_t width = head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));

  Tensor q = matmul(query_x, w_q.value);
  Tensor k = matmul(kv_x, w_k.value);
  Tensor v = matmul(kv_x, w_v.value);

  Tensor context({q.dim(0), d_model()});
  std::vector<Tensor> weights;
  weights.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor qh = head_slice(q, h, width);
    const Tensor kh = head_slice(k, h, width);
    const Tensor vh = head_slice(v, h, width);
    Tensor scores = matmul(qh, transposed(kh));
    scale_in_place(scores, scale);
    const Tensor attn = softmax_rows(scores);
    const Tensor ctx_h = matmul(attn, vh);
    for (std::size_t i = 0; i < ctx_h.dim(0); ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        context.at(i, h * width + j) = ctx_h.at(i, j);
      }
    }
    weights.push_back(attn);
  }
  Tensor out = matmul(context, w_o.value);
  if (cache != nullptr) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->weights = std::move(weights);
    cache->context = std::move(context);
  }
  return out;
}

std::pair<Tensor, Tensor> MultiHeadAttention::backward(
    const Tensor& query_x, const Tensor& kv_x, const Cache& cache,
    const Tensor& grad_out) {
  const std::size_t width = head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));

  add_in_place(w_o.grad, matmul(transposed(cache.context), grad_out));
  const Tensor grad_context = matmul(grad_out, transposed(w_o.value));

  Tensor grad_q({cache.q.dim(0), d_model()});
  Tensor grad_k({cache.k.dim(0), d_model()});
  Tensor grad_v({cache.v.dim(0), d_model()});
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor qh = head_slice(cache.q, h, width);
    const Tensor kh = head_slice(cache.k, h, width);
    const Tensor vh = head_slice(cache.v, h, width);
    const Tensor grad_ctx_h = head_slice(grad_context, h, width);
    const Tensor& attn = cache.weights[h];

    const Tensor grad_attn = matmul(grad_ctx_h, transposed(vh));
    const Tensor grad_vh = matmul(transposed(attn), grad_ctx_h);
    Tensor grad_scores = softmax_backward_rows(attn, grad_attn);
    scale_in_place(grad_scores, scale);
    const Tensor grad_qh = matmul(grad_scores, kh);
    const Tensor grad_kh = matmul(transposed(grad_scores), qh);

    for (std::size_t i = 0; i < grad_qh.dim(0); ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        grad_q.at(i, h * width + j) = grad_qh.at(i, j);
      }
    }
    for (std::size_t i = 0; i < grad_kh.dim(0); ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        grad_k.at(i, h * width + j) = grad_kh.at(i, j);
        grad_v.at(i, h * width + j) = grad_vh.at(i, j);
      }
    }
  }

  add_in_place(w_q.grad, matmul(transposed(query_x), grad_q));
  add_in_place(w_k.grad, matmul(transposed(kv_x), grad_k));
  add_in_place(w_v.grad, matmul(transposed(kv_x), grad_v));

  Tensor grad_query_x = matmul(grad_q, transposed(w_q.value));
  Tensor grad_kv_x = matmul(grad_k, transposed(w_k.value));
  add_in_place(grad_kv_x, matmul(grad_v, transposed(w_v.value)));
  return {std::move(grad_query_x), std::move(grad_kv_x)};
}

void MultiHeadAttention::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&w_q);
  out.push_back(&w_k);
  out.push_back(&w_v);
  out.push_back(&w_o);
}

}  // namespace casanet
