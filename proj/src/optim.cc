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

#include "stylerl/optim.h"

#include <cmath>

#include "stylerl/errors.h"

namespace stylerl {

Adam::Adam(std::vector<Parameter *> params, const AdamConfig &config)
    : params_(std::move(params)), config_(config) {
  if (config.lr <= 0.0) throw ConfigError("learning rate must be positive");
  for (const Parameter *p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

double GradNorm(const std::vector<Parameter *> &params) {
  double total = 0.0;
  for (const Parameter *p : params) {
    for (size_t i = 0; i < p->grad.size(); ++i) total += p->grad[i] * p->grad[i];
  }
  return std::sqrt(total);
}

void Adam::ZeroGrad() {
  for (Parameter *p : params_) p->ZeroGrad();
}

double Adam::Step() {
  const double norm = GradNorm(params_);
  if (!std::isfinite(norm)) throw CheckError("non-finite gradient norm");
  double scale = 1.0;
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) scale = config_.clip_norm / norm;
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Parameter &p = *params_[k];
    double *m = m_[k].data();
    double *v = v_[k].data();
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double gi = p.grad[i] * scale;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      p.value[i] -= config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
    }
    p.ZeroGrad();
  }
  return norm;
}

}  // namespace stylerl
