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

#ifndef CASANET_AUGMENT_HPP_
#define CASANET_AUGMENT_HPP_

#include <cstddef>
#include <vector>

#include "casanet/rng.hpp"
#include "casanet/tensor.hpp"

namespace casanet {

// Mixup settings. lambda is drawn from Beta(alpha, alpha) per pair.
struct MixupParams {
  double alpha = 0.5;
  bool enabled = false;
};

// The mixable part of one training block. Audio features are kept
// separate and are never interpolated.
struct TrainingSample {
  Tensor visual;   // [T x N x F_lip]
  Tensor speaker;  // [N x D_I], unit-norm rows
  Tensor labels;   // [T x N]; {0,1} before mixup, [0,1] after
  Tensor valid;    // [1 x N]; 1 marks a channel that counts toward the loss
};

// Convex combination of every field: lambda * a + (1 - lambda) * b.
// Speaker embeddings are re-normalized to unit rows after mixing.
// Throws std::invalid_argument on shape mismatch or lambda outside [0, 1].
TrainingSample mixup(const TrainingSample& a, const TrainingSample& b,
                     double lambda);

// Pads a session's channels up to n_max. Each new channel receives
// idle-state visual features and an out-of-session speaker embedding
// drawn from the donor pools, an all-zero label row, and valid = 1
// (padded channels are true negatives and count toward the loss).
// Existing channels are preserved bit-exactly.
// donor_visual: candidate [T x F_lip] idle lip-feature matrices;
// donor_embeddings: [K x D_I] unit-norm rows from other sessions.
// Throws std::invalid_argument if padding is needed and a pool is empty.
TrainingSample negative_sample_pad(const TrainingSample& sample,
                                   std::size_t n_max,
                                   const std::vector<Tensor>& donor_visual,
                                   const Tensor& donor_embeddings, Rng& rng);

}  // namespace casanet

#endif  // CASANET_AUGMENT_HPP_
