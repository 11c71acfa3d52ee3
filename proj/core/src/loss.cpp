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

#include "casanet/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace casanet {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

BceResult bce_with_logits(const Tensor& logits, const Tensor& targets, const Tensor& mask) {
  if (!logits.same_shape(targets) || !logits.same_shape(mask)) {
    throw std::invalid_argument("bce_with_logits: shape mismatch, logits " + logits.shape_str() +
                                " targets " + targets.shape_str() + " mask " + mask.shape_str());
  }
  double mask_total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) mask_total += mask[i];
  if (mask_total <= 0.0) {
    throw std::invalid_argument("bce_with_logits: mask selects no entries");
  }

  BceResult out;
  out.probs = Tensor(logits.shape());
  out.grad_logits = Tensor(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = targets[i];
    const double p = sigmoid(z);
    out.probs[i] = p;
    if (mask[i] == 0.0) continue;
    // softplus form keeps the loss finite for any logit magnitude:
    // -y*log(p) - (1-y)*log(1-p) == max(z,0) - y*z + log1p(exp(-|z|))
    total += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::fabs(z)));
    out.grad_logits[i] = (p - y) * mask[i] / mask_total;
  }
  out.value = total / mask_total;
  return out;
}

}  // namespace casanet
