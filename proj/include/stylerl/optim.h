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

#ifndef STYLERL_OPTIM_H_
#define STYLERL_OPTIM_H_

#include <unordered_map>
#include <vector>

#include "stylerl/tensor.h"

namespace stylerl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip; 0 disables it.
  double clip_norm = 5.0;
};

// Adam over a fixed parameter list. Step() consumes and zeroes the grads.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Parameter *> params, const AdamConfig &config);

  // Returns the gradient norm before clipping.
  double Step();
  void ZeroGrad();
  long steps() const { return steps_; }
  const AdamConfig &config() const { return config_; }

 private:
  std::vector<Parameter *> params_;
  std::vector<Tensor> m_, v_;
  AdamConfig config_;
  long steps_ = 0;
};

// L2 norm over all gradients.
double GradNorm(const std::vector<Parameter *> &params);

}  // namespace stylerl

#endif  // STYLERL_OPTIM_H_
