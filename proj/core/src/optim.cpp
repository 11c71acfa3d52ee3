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

#include "casanet/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace casanet {

void adam_step(Parameter& p, double learning_rate, const AdamConfig& cfg) {
  if (!p.grad.all_finite()) {
    throw std::runtime_error("adam_step: non-finite gradient for parameter '" + p.name + "'");
  }
  p.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double g = p.grad[i];
    p.moment1[i] = cfg.beta1 * p.moment1[i] + (1.0 - cfg.beta1) * g;
    p.moment2[i] = cfg.beta2 * p.moment2[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = p.moment1[i] / bc1;
    const double v_hat = p.moment2[i] / bc2;
    p.value[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace casanet
