// Copyright 2026 The StyleRL Authors.
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

#ifndef STYLERL_GRADCHECK_H_
#define STYLERL_GRADCHECK_H_

#include <functional>
#include <vector>

#include "stylerl/autodiff.h"

namespace stylerl {

struct GradCheckReport {
  // Per-coordinate |analytic - numeric| / max(|analytic|, |numeric|, floor).
  std::vector<double> rel_errors;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  Tensor analytic;
  Tensor numeric;
};

// Denominator floor of the relative error. Coordinates whose true derivative
// is below it are effectively compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-5;

double RelativeError(double analytic, double numeric);

// f maps a graph and an input leaf to a scalar. The check compares the
// reverse-mode gradient at x against central differences with step eps.
// Throws CheckError if two forward evaluations at x disagree, ContractError
// if eps <= 0.
using ScalarFn = std::function<Var(Graph &, Var)>;
GradCheckReport GradCheck(const ScalarFn &f, const Tensor &x, double eps = 1e-5,
                          double tol = 1e-4);

// Same check against model parameters, perturbed in place and restored.
// At most `max_coords` coordinates per parameter are probed, spread evenly.
using LossFn = std::function<Var(Graph &)>;
GradCheckReport GradCheckParams(const LossFn &f, const std::vector<Parameter *> &params,
                                double eps = 1e-5, double tol = 1e-4,
                                int max_coords = 24);

}  // namespace stylerl

#endif  // STYLERL_GRADCHECK_H_
