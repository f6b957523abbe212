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

#include "stylerl/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "stylerl/errors.h"

namespace stylerl {
namespace {

double Evaluate(const ScalarFn &f, const Tensor &x) {
  Graph g(false);
  return f(g, g.Constant(x)).value().item();
}

double Evaluate(const LossFn &f) {
  Graph g(false);
  return f(g).value().item();
}

void Finish(GradCheckReport &report, double tol) {
  report.tolerance = tol;
  report.rel_errors.resize(report.analytic.size());
  report.max_rel_error = 0.0;
  for (size_t i = 0; i < report.analytic.size(); ++i) {
    report.rel_errors[i] = RelativeError(report.analytic[i], report.numeric[i]);
    report.max_rel_error = std::max(report.max_rel_error, report.rel_errors[i]);
  }
  report.passed = report.max_rel_error <= tol;
}

}  // namespace

double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport GradCheck(const ScalarFn &f, const Tensor &x, double eps, double tol) {
  if (!(eps > 0)) throw ContractError("grad_check: eps must be positive");
  const double base = Evaluate(f, x);
  if (Evaluate(f, x) != base) {
    throw CheckError("grad_check: function is not deterministic");
  }
  GradCheckReport report;
  {
    Graph g;
    Var in = g.Input(x);
    Var out = f(g, in);
    g.Backward(out);
    report.analytic = g.grad(in);
  }
  report.numeric = Tensor(x.shape());
  Tensor probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = Evaluate(f, probe);
    probe[i] = x[i] - eps;
    const double down = Evaluate(f, probe);
    probe[i] = x[i];
    report.numeric[i] = (up - down) / (2 * eps);
  }
  Finish(report, tol);
  return report;
}

GradCheckReport GradCheckParams(const LossFn &f, const std::vector<Parameter *> &params,
                                double eps, double tol, int max_coords) {
  if (!(eps > 0)) throw ContractError("grad_check: eps must be positive");
  const double base = Evaluate(f);
  if (Evaluate(f) != base) {
    throw CheckError("grad_check: function is not deterministic");
  }
  for (Parameter *p : params) p->ZeroGrad();
  {
    Graph g;
    Var out = f(g);
    g.Backward(out);
  }
  std::vector<double> analytic, numeric;
  for (Parameter *p : params) {
    const size_t n = p->value.size();
    const size_t stride = std::max<size_t>(1, n / static_cast<size_t>(max_coords));
    for (size_t i = 0; i < n; i += stride) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = Evaluate(f);
      p->value[i] = saved - eps;
      const double down = Evaluate(f);
      p->value[i] = saved;
      analytic.push_back(p->grad[i]);
      numeric.push_back((up - down) / (2 * eps));
    }
  }
  GradCheckReport report;
  const int count = static_cast<int>(analytic.size());
  report.analytic = Tensor({count}, std::move(analytic));
  report.numeric = Tensor({count}, std::move(numeric));
  Finish(report, tol);
  return report;
}

}  // namespace stylerl
