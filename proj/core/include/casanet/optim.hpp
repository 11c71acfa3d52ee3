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

#include <cstdint>
#include <string>
#include <vector>

#include "casanet/tensor.hpp"

namespace casanet {

// Trainable tensor with its gradient and Adam state. Gradients
// accumulate across backward calls and are cleared only by an explicit
// zero_grad().
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor moment1;
  Tensor moment2;
  std::int64_t step = 0;

  Parameter(std::string name_, Tensor init)
      : name(std::move(name_)),
        value(std::move(init)),
        grad(value.shape()),
        moment1(value.shape()),
        moment2(value.shape()) {}

  void zero_grad() {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = 0.0;
  }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update. The gradient is left untouched.
// Throws if the gradient contains a non-finite value, naming the
// parameter.
void adam_step(Parameter& p, double learning_rate, const AdamConfig& cfg = {});

inline void adam_step_all(const std::vector<Parameter*>& params, double learning_rate,
                          const AdamConfig& cfg = {}) {
  for (Parameter* p : params) adam_step(*p, learning_rate, cfg);
}

inline void zero_grad_all(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace casanet
