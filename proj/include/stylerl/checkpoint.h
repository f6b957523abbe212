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

#ifndef STYLERL_CHECKPOINT_H_
#define STYLERL_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <string>

#include "stylerl/evaluation.h"
#include "stylerl/layers.h"
#include "stylerl/vocab.h"

namespace stylerl {

inline constexpr char kCheckpointMagic[8] = {'S', 'T', 'Y', 'L', 'E', 'R', 'L', '\0'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Binary container: magic, version, stage tag, config snapshot, vocabulary,
// string-valued hyperparameters, and named tensors stored as little-endian
// doubles, followed by a CRC-32 of all preceding bytes.
struct Checkpoint {
  std::string stage;
  std::string config_text;
  Vocab vocab;
  std::map<std::string, std::string> hparams;
  NamedTensors tensors;

  const Tensor &Get(const std::string &name) const;
  const std::string &Param(const std::string &key) const;
  double ParamDouble(const std::string &key) const;
  int ParamInt(const std::string &key) const;
};

std::string SerializeCheckpoint(const Checkpoint &ckpt);
// FormatError on a bad magic or version, IntegrityError on a checksum
// mismatch or truncation.
Checkpoint ParseCheckpoint(const std::string &bytes);

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint LoadCheckpoint(const std::string &path);

// Evaluation classifier in the same container.
Checkpoint EvalClassifierCheckpoint(const EvalClassifier &clf);
EvalClassifier EvalClassifierFromCheckpoint(const Checkpoint &ckpt);

}  // namespace stylerl

#endif  // STYLERL_CHECKPOINT_H_
