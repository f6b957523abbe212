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

#ifndef STYLERL_TRAINING_H_
#define STYLERL_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "stylerl/classifier.h"
#include "stylerl/discriminator.h"
#include "stylerl/generator.h"
#include "stylerl/lm.h"
#include "stylerl/optim.h"
#include "stylerl/rewards.h"
#include "stylerl/sim.h"

namespace stylerl {

enum class ClassifierMode { kFixed, kAdversarial };
enum class RewardNorm { kStandardize, kNone };
enum class RolloutMode { kGreedy, kSample };

ClassifierMode ParseClassifierMode(const std::string &name);
std::string ClassifierModeName(ClassifierMode m);
RewardNorm ParseRewardNorm(const std::string &name);
std::string RewardNormName(RewardNorm n);
RolloutMode ParseRolloutMode(const std::string &name);
std::string RolloutModeName(RolloutMode m);

struct TrainConfig {
  RewardWeights bootstrap_weights = RewardWeights::Bootstrap();
  RewardWeights finetune_weights = RewardWeights::Finetune();
  int batch_size = 32;
  double lr_gen = 1e-3;
  double lr_cls = 1e-3;
  double lr_adv = 1e-3;
  double clip_norm = 5.0;
  int bootstrap_epochs = 2;
  int finetune_epochs = 1;
  // Per-stage cap on generator updates; 0 means no cap.
  int max_batches = 0;
  int eval_interval = 200;
  int cls_pretrain_epochs = 3;
  uint64_t seed = 1;
  ClassifierMode cls_mode = ClassifierMode::kAdversarial;
  LpVariant lp_variant = LpVariant::kVerbatim;
  ContentReward content_reward = ContentReward::kSimile;
  RewardNorm lang_norm = RewardNorm::kStandardize;
  RolloutMode rollout = RolloutMode::kGreedy;

  // ConfigError on non-positive sizes or rates.
  void Validate() const;
};

struct Example {
  TokenIds ids;
  int style = 0;
};

// Event counts, used to observe which gradient paths ran.
struct TrainCounters {
  long generator_steps = 0;
  long rollouts = 0;
  long reinforce_batches = 0;
  long reinforce_samples = 0;
  long soft_unrolls = 0;
  long first_pass_decodes = 0;
  long empty_outputs = 0;
  long skipped_rewards = 0;
  long cls_updates = 0;
  long adv_updates = 0;
};

struct StepResult {
  LossTerms losses;
  double total = 0.0;
  // Transferred sentences (EOS stripped, empty ones replaced by UNK).
  std::vector<TokenIds> outputs;
};

struct DiscLosses {
  double cls = 0.0;
  double adv = 0.0;
};

struct DevMetrics {
  double accuracy = 0.0;   // fraction
  double self_bleu = 0.0;  // [0, 100]
  double perplexity = 0.0;
};
using DevEvalFn = std::function<DevMetrics(Generator &)>;

struct MetricsRecord {
  std::string stage;
  int epoch = 0;
  long batch = 0;
  DevMetrics dev;
  LossTerms losses;  // averaged since the previous record
  double total_loss = 0.0;

  std::string ToJsonLine() const;
  static MetricsRecord FromJsonLine(const std::string &line);
};

std::vector<MetricsRecord> ReadMetricsHistory(const std::string &path);

struct CheckpointMeta {
  std::string stage;
  double accuracy = 0.0;
  double self_bleu = 0.0;
  double perplexity = 0.0;
  int epoch = 0;
  long batch = 0;
  std::string path;
  bool fallback = false;

  static CheckpointMeta FromRecord(const MetricsRecord &r);
};

// mean(100 * accuracy, self-BLEU).
double Stage1Score(const DevMetrics &m);
// Index of the first record with the highest Stage1Score; ContractError on
// an empty history.
size_t SelectStage1(const std::vector<MetricsRecord> &history);
// accuracy >= stage 1, self-BLEU >= stage 1 and perplexity <= stage 1.
bool Stage2Qualifies(const DevMetrics &m, const CheckpointMeta &stage1);
// Qualifying record with the lowest perplexity (first on ties).
std::optional<size_t> SelectStage2(const std::vector<MetricsRecord> &history,
                                   const CheckpointMeta &stage1);

struct StageResult {
  CheckpointMeta selected;
  std::vector<MetricsRecord> history;
  // Parameters of every model at the selected point.
  NamedTensors snapshot;
  bool diverged = false;
};

// Per-batch standardization (mean 0, std 1 with a 1e-6 floor); non-finite
// entries are left untouched and excluded from the statistics.
std::vector<double> Standardize(const std::vector<double> &values);

// Loss pieces, exposed for tests. All return scalar Vars on g.
// Mean over rows of the length-normalized NLL of ys given (xs, styles); ys
// get EOS appended.
Var SequenceNll(Graph &g, Generator &gen, const std::vector<TokenIds> &xs,
                const std::vector<int> &styles, const std::vector<TokenIds> &ys);
// -(1/N) sum_b w_b / L_b * sum_t log p(token_bt), L_b counting EOS.
Var ReinforceLoss(const Rollout &rollout, const std::vector<double> &row_rewards);
// -(1/N) sum_b log sigmoid(logit_b), floored at log 1e-12.
Var NegLogSigmoidMean(Var logits);
// Output length (EOS excluded) of each rollout row.
std::vector<int> RolloutLengths(const Rollout &rollout);

class Trainer {
 public:
  // lm and sim may be null when the fine-tuning weights never need them.
  Trainer(const TrainConfig &config, const Vocab &vocab, Generator &gen, StyleClassifier &cls,
          NaturalnessDiscriminator &adv, NeuralLM *lm, const SimModel *sim);

  void set_metrics_sink(std::ostream *out) { metrics_out_ = out; }
  // Called whenever a stage keeps a new best point.
  using SaveFn = std::function<void(const CheckpointMeta &, const NamedTensors &)>;
  void set_save_hook(SaveFn fn) { save_ = std::move(fn); }
  // Leave the models at their last update instead of the selected point.
  // Selection and checkpoints are unaffected.
  void set_keep_final(bool keep) { keep_final_ = keep; }

  // Supervised classifier training on real sentences; returns the last
  // epoch's mean loss.
  double PretrainClassifier(const std::vector<Example> &data, int epochs);

  StepResult GeneratorStep(const std::vector<Example> &batch, const RewardWeights &w);
  // One step on each scorer. The classifier step is skipped when
  // update_cls is false.
  DiscLosses UpdateDiscriminators(const std::vector<Example> &real,
                                  const std::vector<TokenIds> &generated, bool update_cls,
                                  bool update_adv);

  StageResult Bootstrap(const std::vector<Example> &train, const DevEvalFn &eval);
  StageResult Finetune(const std::vector<Example> &train, const DevEvalFn &eval,
                       const CheckpointMeta &stage1);

  NamedTensors Snapshot();
  void Restore(const NamedTensors &snapshot);

  const TrainCounters &counters() const { return counters_; }
  const TrainConfig &config() const { return config_; }

 private:
  StageResult RunStage(const std::string &stage, const std::vector<Example> &train,
                       const DevEvalFn &eval, const RewardWeights &w, int epochs,
                       const CheckpointMeta *stage1);
  std::vector<double> ContentRewards(const std::vector<TokenIds> &xs,
                                     const std::vector<TokenIds> &ys);
  std::vector<double> FluencyRewards(const std::vector<TokenIds> &xs,
                                     const std::vector<TokenIds> &ys);

  TrainConfig config_;
  bool keep_final_ = false;
  const Vocab &vocab_;
  Generator &gen_;
  StyleClassifier &cls_;
  NaturalnessDiscriminator &adv_;
  NeuralLM *lm_;
  const SimModel *sim_;
  Adam gen_opt_, cls_opt_, adv_opt_;
  std::mt19937_64 rng_;
  std::mt19937_64 sampler_;
  TrainCounters counters_;
  std::ostream *metrics_out_ = nullptr;
  SaveFn save_;
};

}  // namespace stylerl

#endif  // STYLERL_TRAINING_H_
