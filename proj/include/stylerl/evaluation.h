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

#ifndef STYLERL_EVALUATION_H_
#define STYLERL_EVALUATION_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stylerl/corpus.h"
#include "stylerl/generator.h"
#include "stylerl/lm.h"
#include "stylerl/sim.h"

namespace stylerl {

// Linear two-class model over hashed unigram and bigram counts. Kept apart
// from the training classifier on purpose: different features, different
// optimizer, different code.
class EvalClassifier {
 public:
  static constexpr int kBuckets = 1 << 18;

  struct TrainOptions {
    int epochs = 5;
    double lr = 0.1;
    uint64_t seed = 7;
  };

  EvalClassifier();

  void Train(const StyleSplit &data, const TrainOptions &options);
  void Train(const StyleSplit &data) { Train(data, TrainOptions()); }

  // log p(style 1 | x) - log p(style 0 | x).
  double LogOdds(const Sentence &x) const;
  int Predict(const Sentence &x) const { return LogOdds(x) > 0.0 ? 1 : 0; }
  // True when no feature of x was seen during training; such sentences are
  // decided by the bias alone.
  bool EmptyFeatures(const Sentence &x) const;

  // Bucket indices of the features of x, with repetition.
  static std::vector<uint32_t> Features(const Sentence &x);

  // Dense export for checkpoints: weights [2, kBuckets], bias [2], seen mask.
  std::vector<double> &weights(int style) { return w_[style]; }
  const std::vector<double> &weights(int style) const { return w_[style]; }
  std::array<double, 2> &bias() { return b_; }
  const std::array<double, 2> &bias() const { return b_; }
  std::vector<uint8_t> &seen() { return seen_; }
  const std::vector<uint8_t> &seen() const { return seen_; }

 private:
  std::array<std::vector<double>, 2> w_;
  std::array<double, 2> b_{};
  std::vector<uint8_t> seen_;
};

struct AccuracyResult {
  double accuracy = 0.0;
  int empty_feature = 0;
};

// Fraction of outputs the classifier assigns to their target style.
AccuracyResult StyleAccuracy(const EvalClassifier &clf, const std::vector<Sentence> &outputs,
                             const std::vector<int> &targets);

// exp of the corpus mean per-token NLL (EOS counted) under the evaluation LM.
double EvalPerplexity(NeuralLM &lm, const Vocab &vocab, const std::vector<Sentence> &outputs);

// Mean SIM between aligned sentence pairs.
double MeanSim(const SimModel &sim, const std::vector<Sentence> &a, const std::vector<Sentence> &b);

struct MetricsReport {
  double accuracy = 0.0;
  double perplexity = 0.0;
  double self_bleu = 0.0;
  std::optional<double> ref_bleu;
  double self_sim = 0.0;
  std::optional<double> ref_sim;
  int samples = 0;
  int empty_feature = 0;
  int empty_outputs = 0;
  std::string model_id;
  std::string config_id;

  // "key=value" lines in a fixed order; absent reference metrics are
  // written as "absent".
  std::string ToKeyValue() const;
  static MetricsReport FromKeyValue(const std::string &text);
  std::string CsvHeader() const;
  std::string CsvRow() const;

  bool operator==(const MetricsReport &) const = default;
};

// A transfer job: sources with their own styles; outputs go to 1 - style.
struct TransferSet {
  std::vector<Sentence> sources;
  std::vector<int> source_styles;
  std::optional<std::vector<Sentence>> refs;

  static TransferSet FromSplit(const StyleSplit &split, const std::optional<StyleSplit> &refs);
  std::vector<int> Targets() const;
};

// Replaces empty outputs by a single "<unk>" token; returns how many.
int FillEmpty(std::vector<Sentence> &outputs);

// Metrics of given outputs for a transfer set.
MetricsReport EvaluateOutputs(const TransferSet &set, std::vector<Sentence> outputs,
                              const EvalClassifier &clf, NeuralLM &lm, const Vocab &vocab,
                              const SimModel &sim);

// Greedy transfer of every source to the opposite style.
std::vector<Sentence> TransferAll(Generator &gen, const Vocab &vocab,
                                  const std::vector<Sentence> &sources,
                                  const std::vector<int> &targets, int batch_size = 64);

MetricsReport EvaluateAll(Generator &gen, const Vocab &vocab, const TransferSet &set,
                          const EvalClassifier &clf, NeuralLM &lm, const SimModel &sim);

struct AblationResult {
  double before = 0.0;
  double after = 0.0;
  double drop_points() const { return 100.0 * (before - after); }
};

// Accuracy before and after removing each output's first token. One-token
// outputs become "<unk>".
AblationResult FirstTokenAblation(const EvalClassifier &clf, const std::vector<Sentence> &outputs,
                                  const std::vector<int> &targets);

struct SkewEntry {
  std::string token;
  long count0 = 0;
  long count1 = 0;
  double skew = 0.5;
  long output_count = 0;
  long source_count = 0;
  bool flagged = false;
};

struct AuditReport {
  AblationResult ablation;
  std::vector<SkewEntry> skew_table;
  std::vector<std::string> flagged;
  double injection_rate = 0.0;
  int min_count = 0;
  double skew_threshold = 0.0;

  std::string ToKeyValue() const;
  std::string SkewCsv() const;
};

// max(c0, c1) / (c0 + c1); 0.5 when both are zero.
double SkewScore(long c0, long c1);

// Ratio of output occurrences to source occurrences a token needs before it
// can be flagged.
inline constexpr double kOverproductionRatio = 3.0;

// Skew table over tokens with corpus count >= min_count. A token is flagged
// when skew >= threshold and its output count is at least 3 * max(source
// count, 1).
std::vector<SkewEntry> ClassSkewAudit(const StyleSplit &corpus, const std::vector<Sentence> &sources,
                                      const std::vector<Sentence> &outputs, int min_count,
                                      double skew_threshold);

// Share of outputs that the classifier accepts as the target style only
// because of their first token, where that token was not the source's first
// token.
double InjectionRate(const EvalClassifier &clf, const std::vector<Sentence> &sources,
                     const std::vector<Sentence> &outputs, const std::vector<int> &targets);

AuditReport Audit(const EvalClassifier &clf, const StyleSplit &corpus, const TransferSet &set,
                  const std::vector<Sentence> &outputs, int min_count, double skew_threshold);

// Occurrences of `token` in outputs divided by occurrences in sources (the
// denominator floored at 1).
double OverproductionRatio(const std::string &token, const std::vector<Sentence> &sources,
                           const std::vector<Sentence> &outputs);

}  // namespace stylerl

#endif  // STYLERL_EVALUATION_H_
