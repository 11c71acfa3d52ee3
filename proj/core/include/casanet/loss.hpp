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

#include "casanet/tensor.hpp"

namespace casanet {

// Masked binary cross-entropy evaluated from logits.
struct BceResult {
  double value = 0.0;   // mean loss over unmasked entries
  Tensor probs;         // sigmoid(logits), same shape as input
  Tensor grad_logits;   // d value / d logits, zero where masked out
};

// logits, targets and mask share one shape. targets lie in
// [0, 1] (label interpolation produces soft targets); mask
// entries are 0 (ignore) or 1 (count). The loss is averaged over the
// mask so padded speakers do not dilute the signal. Throws if the mask
// is all zero or shapes disagree.
BceResult bce_with_logits(const Tensor& logits, const Tensor& targets, const Tensor& mask);

double sigmoid(double z);

}  // namespace casanet
