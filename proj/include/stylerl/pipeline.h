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

#ifndef STYLERL_PIPELINE_H_
#define STYLERL_PIPELINE_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stylerl/checkpoint.h"
#include "stylerl/config.h"
#include "stylerl/evaluation.h"
#include "stylerl/training.h"

namespace stylerl {

// The synthetic spec a config describes (planted skew only when enabled).
SyntheticSpec EffectiveSyntheticSpec(const Config &config);

// Corpus-derived state shared by every command.
struct Workspace {
  StyledCorpus corpus;  // train holds the generator's share only
  StyleSplit heldout;   // evaluation LM data
  Vocab vocab;
  std::optional<SimModel> sim;
};

// Loads the corpus, carves out the held-out slice, builds the vocabulary
// and loads the embedding file when it exists. ConfigError when SIM is
// needed and the file is missing.
Workspace PrepareWorkspace(const Config &config);
// Same, from an in-memory corpus and optional embeddings.
Workspace PrepareWorkspace(const Config &config, StyledCorpus corpus, std::optional<SimModel> sim);

std::vector<Example> EncodeSplit(const StyleSplit &split, const Vocab &vocab);

struct Models {
  Generator gen;
  StyleClassifier cls;
  NaturalnessDiscriminator adv;
  NeuralLM fluency_lm;
};

std::unique_ptr<Models> MakeModels(const Config &config, int vocab_size);

// Evaluation-side models: classifier on the training split, LM on the
// held-out slice.
struct EvalKit {
  EvalClassifier clf;
  NeuralLM lm;
};

std::unique_ptr<EvalKit> BuildEvalKit(const Config &config, const Workspace &ws);

// Dev evaluation used for checkpoint selection.
DevEvalFn MakeDevEval(const Config &config, const Workspace &ws, EvalKit &kit);

struct TrainOutcome {
  CheckpointMeta stage1;
  std::optional<CheckpointMeta> stage2;
  std::vector<MetricsRecord> history;
  TrainCounters counters;
  bool diverged = false;
  double lm_loss = 0.0;
  double cls_pretrain_loss = 0.0;
};

struct TrainOptions {
  int stages = 2;
  // Output locations; empty disables the corresponding files.
  std::string metrics_path;
  std::string checkpoint_dir;
  // When set, the models already hold this stage-1 point: classifier
  // pre-training and bootstrap are skipped, and the fluency LM is only
  // fitted if it has not been yet.
  std::optional<CheckpointMeta> resume_stage1;
  // Return the models as left by the last update of the last stage rather
  // than at its selected point. Used by ablation runs.
  bool keep_final_weights = false;
};

// Fits the fluency LM, pre-trains the classifier and runs the stages.
TrainOutcome RunTraining(const Config &config, const Workspace &ws, Models &models, EvalKit &kit,
                         const TrainOptions &options);

// Model checkpoint with all generator-side networks.
Checkpoint ModelCheckpoint(const Config &config, const Vocab &vocab, Models &models,
                           const CheckpointMeta &meta);
// The selection record a model checkpoint carries.
CheckpointMeta MetaFromCheckpoint(const Checkpoint &ckpt);
// Rebuilds models from a checkpoint using the dimensions it records.
std::unique_ptr<Models> ModelsFromCheckpoint(const Checkpoint &ckpt, Config *config);

Checkpoint LMCheckpoint(const std::string &stage, const Vocab &vocab, NeuralLM &lm);
NeuralLM LMFromCheckpoint(const Checkpoint &ckpt);

}  // namespace stylerl

#endif  // STYLERL_PIPELINE_H_
