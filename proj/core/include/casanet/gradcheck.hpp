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

#include <functional>
#include <string>
#include <vector>

#include "casanet/optim.hpp"

namespace casanet {

// Verdict of a finite-difference sweep over a set of parameters.
struct GradCheckReport {
  bool passed = true;
  double max_rel_error = 0.0;
  std::string worst_entry;  // "<param>[i]" of the worst relative error
  std::size_t checked = 0;
};

// loss_and_grad must (re)compute the loss for the current parameter
// values and leave analytic gradients in each Parameter::grad. The
// checker compares those gradients against central differences, entry
// by entry. It first evaluates the loss twice and demands bitwise
// identical results, so any hidden nondeterminism fails loudly instead
// of polluting the comparison. Relative error uses a floored
// denominator so near-zero gradients are compared absolutely.
GradCheckReport finite_diff_check(const std::function<double()>& loss_and_grad,
                                  const std::vector<Parameter*>& params, double epsilon = 1e-5,
                                  double tolerance = 1e-4);

}  // namespace casanet
