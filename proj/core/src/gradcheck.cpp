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

#include "casanet/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace casanet {

GradCheckReport finite_diff_check(const std::function<double()>& loss_and_grad,
                                  const std::vector<Parameter*>& params, double epsilon,
                                  double tolerance) {
  // A stochastic or state-leaking loss makes finite differences
  // meaningless; insist on exact repeatability up front.
  zero_grad_all(params);
  const double first = loss_and_grad();
  zero_grad_all(params);
  const double second = loss_and_grad();
  if (first != second) {
    throw std::runtime_error("finite_diff_check: loss is not deterministic across calls");
  }

  // Snapshot the analytic gradients before we start nudging values.
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + epsilon;
      zero_grad_all(params);
      const double plus = loss_and_grad();
      p.value[i] = saved - epsilon;
      zero_grad_all(params);
      const double minus = loss_and_grad();
      p.value[i] = saved;

      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double expected = analytic[pi][i];
      const double denom =
          std::max({std::fabs(numeric), std::fabs(expected), 1e-4});
      const double rel = std::fabs(numeric - expected) / denom;
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_entry = p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  report.passed = report.max_rel_error <= tolerance;

  // Leave the analytic gradients in place for the caller.
  zero_grad_all(params);
  const double final_loss = loss_and_grad();
  (void)final_loss;
  return report;
}

}  // namespace casanet
