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

#include "stylerl/training.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "stylerl/errors.h"
#include "stylerl/kernels.h"

namespace stylerl {
namespace {

AdamConfig MakeAdam(double lr, double clip) {
  AdamConfig c;
  c.lr = lr;
  c.clip_norm = clip;
  return c;
}

TokenIds StripEos(const TokenIds &tokens) {
  TokenIds out;
  for (int t : tokens) {
    if (t == kEos) break;
    out.push_back(t);
  }
  return out;
}

std::vector<Parameter *> Join(std::vector<Parameter *> a, const std::vector<Parameter *> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

ClassifierMode ParseClassifierMode(const std::string &name) {
  if (name == "fixed") return ClassifierMode::kFixed;
  if (name == "adversarial") return ClassifierMode::kAdversarial;
  throw ConfigError("classifier_mode must be 'fixed' or 'adversarial', got '" + name + "'");
}

std::string ClassifierModeName(ClassifierMode m) {
  return m == ClassifierMode::kFixed ? "fixed" : "adversarial";
}

RewardNorm ParseRewardNorm(const std::string &name) {
  if (name == "standardize") return RewardNorm::kStandardize;
  if (name == "none") return RewardNorm::kNone;
  throw ConfigError("lang_norm must be 'standardize' or 'none', got '" + name + "'");
}

std::string RewardNormName(RewardNorm n) {
  return n == RewardNorm::kStandardize ? "standardize" : "none";
}

RolloutMode ParseRolloutMode(const std::string &name) {
  if (name == "greedy") return RolloutMode::kGreedy;
  if (name == "sample") return RolloutMode::kSample;
  throw ConfigError("rollout must be 'greedy' or 'sample', got '" + name + "'");
}

std::string RolloutModeName(RolloutMode m) { return m == RolloutMode::kGreedy ? "greedy" : "sample"; }

void TrainConfig::Validate() const {
  bootstrap_weights.Validate();
  finetune_weights.Validate();
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  for (double lr : {lr_gen, lr_cls, lr_adv}) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be positive");
  }
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (bootstrap_epochs < 0 || finetune_epochs < 0 || cls_pretrain_epochs < 0) {
    throw ConfigError("epoch counts must be >= 0");
  }
  if (max_batches < 0) throw ConfigError("max_batches must be >= 0");
  if (eval_interval < 1) throw ConfigError("eval_interval must be positive");
}

std::string MetricsRecord::ToJsonLine() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["epoch"] = epoch;
  j["batch"] = batch;
  j["accuracy"] = dev.accuracy;
  j["self_bleu"] = dev.self_bleu;
  j["perplexity"] = dev.perplexity;
  j["loss_total"] = total_loss;
  j["loss_cls"] = losses.cls;
  j["loss_adv"] = losses.adv;
  j["loss_sim"] = losses.sim;
  j["loss_lang"] = losses.lang;
  j["loss_rec"] = losses.rec;
  j["loss_cyc"] = losses.cyc;
  return j.dump();
}

MetricsRecord MetricsRecord::FromJsonLine(const std::string &line) {
  MetricsRecord r;
  try {
    nlohmann::json j = nlohmann::json::parse(line);
    r.stage = j.at("stage").get<std::string>();
    r.epoch = j.at("epoch").get<int>();
    r.batch = j.at("batch").get<long>();
    r.dev.accuracy = j.at("accuracy").get<double>();
    r.dev.self_bleu = j.at("self_bleu").get<double>();
    r.dev.perplexity = j.at("perplexity").get<double>();
    r.total_loss = j.at("loss_total").get<double>();
    r.losses.cls = j.at("loss_cls").get<double>();
    r.losses.adv = j.at("loss_adv").get<double>();
    r.losses.sim = j.at("loss_sim").get<double>();
    r.losses.lang = j.at("loss_lang").get<double>();
    r.losses.rec = j.at("loss_rec").get<double>();
    r.losses.cyc = j.at("loss_cyc").get<double>();
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("metrics record: ") + e.what());
  }
  return r;
}

std::vector<MetricsRecord> ReadMetricsHistory(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read metrics history " + path);
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(MetricsRecord::FromJsonLine(line));
  }
  return out;
}

CheckpointMeta CheckpointMeta::FromRecord(const MetricsRecord &r) {
  CheckpointMeta m;
  m.stage = r.stage;
  m.accuracy = r.dev.accuracy;
  m.self_bleu = r.dev.self_bleu;
  m.perplexity = r.dev.perplexity;
  m.epoch = r.epoch;
  m.batch = r.batch;
  return m;
}

double Stage1Score(const DevMetrics &m) { return 0.5 * (100.0 * m.accuracy + m.self_bleu); }

size_t SelectStage1(const std::vector<MetricsRecord> &history) {
  if (history.empty()) throw ContractError("stage 1 selection over an empty history");
  size_t best = 0;
  for (size_t i = 1; i < history.size(); ++i) {
    if (Stage1Score(history[i].dev) > Stage1Score(history[best].dev)) best = i;
  }
  return best;
}

bool Stage2Qualifies(const DevMetrics &m, const CheckpointMeta &stage1) {
  return m.accuracy >= stage1.accuracy && m.self_bleu >= stage1.self_bleu &&
         m.perplexity <= stage1.perplexity;
}

std::optional<size_t> SelectStage2(const std::vector<MetricsRecord> &history,
                                   const CheckpointMeta &stage1) {
  std::optional<size_t> best;
  for (size_t i = 0; i < history.size(); ++i) {
    if (!Stage2Qualifies(history[i].dev, stage1)) continue;
    if (!best || history[i].dev.perplexity < history[*best].dev.perplexity) best = i;
  }
  return best;
}

std::vector<double> Standardize(const std::vector<double> &values) {
  double sum = 0.0;
  int n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) return values;
  const double mean = sum / n;
  double var = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) var += (v - mean) * (v - mean);
  }
  const double sd = std::max(std::sqrt(var / n), 1e-6);
  std::vector<double> out(values);
  for (double &v : out) {
    if (std::isfinite(v)) v = (v - mean) / sd;
  }
  return out;
}

Var SequenceNll(Graph &g, Generator &gen, const std::vector<TokenIds> &xs,
                const std::vector<int> &styles, const std::vector<TokenIds> &ys) {
  const double n = static_cast<double>(xs.size());
  std::vector<TokenIds> targets(ys);
  std::vector<double> weights;
  for (TokenIds &y : targets) {
    y.push_back(kEos);
    weights.push_back(-1.0 / (n * static_cast<double>(y.size())));
  }
  TeacherForced tf = gen.Score(g, xs, styles, targets);
  return gen.WeightedLogLikelihood(g, tf, weights);
}

std::vector<int> RolloutLengths(const Rollout &rollout) {
  std::vector<int> out;
  for (const TokenIds &t : rollout.tokens) out.push_back(static_cast<int>(StripEos(t).size()));
  return out;
}

Var ReinforceLoss(const Rollout &rollout, const std::vector<double> &row_rewards) {
  const int batch = static_cast<int>(rollout.tokens.size());
  if (static_cast<int>(row_rewards.size()) != batch) throw ContractError("reinforce: reward count");
  const int steps = rollout.steps();
  std::vector<int> targets(static_cast<size_t>(steps) * batch, kPad);
  std::vector<double> weights(targets.size(), 0.0);
  for (int b = 0; b < batch; ++b) {
    const TokenIds &tok = rollout.tokens[b];
    const double w = -row_rewards[b] / (static_cast<double>(batch) * static_cast<double>(tok.size()));
    for (size_t t = 0; t < tok.size(); ++t) {
      targets[t * batch + b] = tok[t];
      weights[t * batch + b] = w;
    }
  }
  Var lp = steps == 1 ? rollout.log_probs[0] : ops::Concat(rollout.log_probs, 0);
  return ops::PickSum(lp, targets, weights);
}

Var NegLogSigmoidMean(Var logits) {
  const double n = static_cast<double>(logits.value().dim(0));
  return ops::Scale(ops::Sum(ops::LogSigmoid(logits, std::log(kProbFloor))), -1.0 / n);
}

Trainer::Trainer(const TrainConfig &config, const Vocab &vocab, Generator &gen,
                 StyleClassifier &cls, NaturalnessDiscriminator &adv, NeuralLM *lm,
                 const SimModel *sim)
    : config_(config),
      vocab_(vocab),
      gen_(gen),
      cls_(cls),
      adv_(adv),
      lm_(lm),
      sim_(sim),
      gen_opt_(gen.Params(), MakeAdam(config.lr_gen, config.clip_norm)),
      cls_opt_(cls.Params(), MakeAdam(config.lr_cls, config.clip_norm)),
      adv_opt_(adv.Params(), MakeAdam(config.lr_adv, config.clip_norm)),
      rng_(config.seed),
      sampler_(config.seed ^ 0x5eedULL) {
  config.Validate();
}

NamedTensors Trainer::Snapshot() {
  NamedTensors out;
  ExportParams(Join(Join(gen_.Params(), cls_.Params()), adv_.Params()), out);
  return out;
}

void Trainer::Restore(const NamedTensors &snapshot) {
  ImportParams(Join(Join(gen_.Params(), cls_.Params()), adv_.Params()), snapshot);
}

std::vector<double> Trainer::ContentRewards(const std::vector<TokenIds> &xs,
                                            const std::vector<TokenIds> &ys) {
  if (config_.content_reward == ContentReward::kSimile && sim_ == nullptr) {
    throw ConfigError("the SIM content reward needs an embedding file");
  }
  std::vector<double> out(xs.size());
  kernels::ParallelFor(xs.size(), [&](size_t b) {
    const Sentence x = vocab_.Decode(xs[b]);
    const Sentence y = vocab_.Decode(ys[b]);
    out[b] = config_.content_reward == ContentReward::kSimile
                 ? SimileReward(*sim_, x, y, config_.finetune_weights.alpha, config_.lp_variant)
                 : BleuReward(x, y);
  });
  return out;
}

std::vector<double> Trainer::FluencyRewards(const std::vector<TokenIds> &xs,
                                            const std::vector<TokenIds> &ys) {
  if (lm_ == nullptr) throw ConfigError("the fluency reward needs a language model");
  std::vector<TokenIds> both(xs);
  both.insert(both.end(), ys.begin(), ys.end());
  std::vector<double> ppl = lm_->Perplexities(both);
  std::vector<double> out(xs.size());
  for (size_t b = 0; b < xs.size(); ++b) out[b] = ppl[b] - ppl[b + xs.size()];
  return config_.lang_norm == RewardNorm::kStandardize ? Standardize(out) : out;
}

StepResult Trainer::GeneratorStep(const std::vector<Example> &batch, const RewardWeights &w) {
  if (batch.empty()) throw ContractError("empty training batch");
  const int n = static_cast<int>(batch.size());
  std::vector<TokenIds> xs;
  std::vector<int> styles, targets, max_lens;
  for (const Example &e : batch) {
    xs.push_back(e.ids);
    styles.push_back(e.style);
    targets.push_back(1 - e.style);
    max_lens.push_back(DefaultMaxLen(e.ids));
  }
  const bool soft = w.cls > 0.0 || w.adv > 0.0;
  const bool reinforce = w.sim > 0.0 || w.lang > 0.0;

  Graph g;
  Rollout rollout;
  std::vector<TokenIds> raw;
  if (soft || reinforce) {
    std::mt19937_64 *sampler = config_.rollout == RolloutMode::kSample ? &sampler_ : nullptr;
    rollout = gen_.Unroll(g, xs, targets, max_lens, soft, sampler);
    raw = rollout.tokens;
    ++counters_.rollouts;
    if (soft) ++counters_.soft_unrolls;
  } else {
    raw = gen_.Greedy(xs, targets, max_lens);
    ++counters_.first_pass_decodes;
  }
  StepResult result;
  for (const TokenIds &t : raw) {
    TokenIds y = StripEos(t);
    if (y.empty()) {
      y = {kUnk};
      ++counters_.empty_outputs;
    }
    result.outputs.push_back(std::move(y));
  }

  Var total;
  auto add = [&total](Var v) { total = total.valid() ? ops::Add(total, v) : v; };
  LossTerms &L = result.losses;
  if (w.rec > 0.0) {
    Var v = SequenceNll(g, gen_, xs, styles, xs);
    L.rec = v.value().item();
    add(ops::Scale(v, w.rec));
  }
  if (w.cyc > 0.0) {
    Var v = SequenceNll(g, gen_, result.outputs, styles, xs);
    L.cyc = v.value().item();
    add(ops::Scale(v, w.cyc));
  }
  if (soft) {
    const std::vector<int> lengths = RolloutLengths(rollout);
    if (w.cls > 0.0) {
      Var v = NegLogSigmoidMean(cls_.LogitsSoft(g, rollout.probs, lengths, targets));
      L.cls = v.value().item();
      add(ops::Scale(v, w.cls));
    }
    if (w.adv > 0.0) {
      Var v = NegLogSigmoidMean(adv_.LogitsSoft(g, rollout.probs, lengths));
      L.adv = v.value().item();
      add(ops::Scale(v, w.adv));
    }
  }
  if (reinforce) {
    std::vector<double> r_sim(n, 0.0), r_lang(n, 0.0), r(n, 0.0);
    if (w.sim > 0.0) r_sim = ContentRewards(xs, result.outputs);
    if (w.lang > 0.0) r_lang = FluencyRewards(xs, result.outputs);
    double sum_sim = 0.0, sum_lang = 0.0;
    for (int b = 0; b < n; ++b) {
      r[b] = w.sim * r_sim[b] + w.lang * r_lang[b];
      if (!std::isfinite(r[b])) {
        r[b] = 0.0;
        ++counters_.skipped_rewards;
        continue;
      }
      sum_sim += r_sim[b];
      sum_lang += r_lang[b];
    }
    L.sim = -sum_sim / n;
    L.lang = -sum_lang / n;
    add(ReinforceLoss(rollout, r));
    ++counters_.reinforce_batches;
    counters_.reinforce_samples += n;
  }
  result.total = CombineLosses(w, L);
  if (total.valid()) {
    if (!std::isfinite(total.value().item()) || !std::isfinite(result.total)) {
      throw CheckError("non-finite generator loss");
    }
    g.Backward(total);
    gen_opt_.Step();
    // The scorers only served as fixed critics here.
    cls_opt_.ZeroGrad();
    adv_opt_.ZeroGrad();
  }
  ++counters_.generator_steps;
  return result;
}

DiscLosses Trainer::UpdateDiscriminators(const std::vector<Example> &real,
                                         const std::vector<TokenIds> &generated, bool update_cls,
                                         bool update_adv) {
  if (real.size() != generated.size()) throw ContractError("real/generated batch mismatch");
  const double n = static_cast<double>(real.size());
  DiscLosses out;
  if (update_cls) {
    // log f(x, s) + log(1 - f(x, 1 - s)) + log(1 - f(x~, 1 - s))
    std::vector<TokenIds> xs;
    std::vector<int> styles;
    std::vector<double> sign;
    for (const Example &e : real) {
      xs.push_back(e.ids);
      styles.push_back(e.style);
      sign.push_back(1.0);
    }
    for (const Example &e : real) {
      xs.push_back(e.ids);
      styles.push_back(1 - e.style);
      sign.push_back(-1.0);
    }
    for (size_t i = 0; i < real.size(); ++i) {
      xs.push_back(generated[i]);
      styles.push_back(1 - real[i].style);
      sign.push_back(-1.0);
    }
    Graph g;
    Var z = ops::Mul(cls_.Logits(g, xs, styles),
                     g.Constant(Tensor({static_cast<int>(sign.size()), 1}, sign)));
    Var loss = ops::Scale(ops::Sum(ops::LogSigmoid(z, std::log(kProbFloor))), -1.0 / n);
    out.cls = loss.value().item();
    g.Backward(loss);
    cls_opt_.Step();
    ++counters_.cls_updates;
  }
  if (update_adv) {
    std::vector<TokenIds> xs;
    std::vector<double> sign;
    for (const Example &e : real) {
      xs.push_back(e.ids);
      sign.push_back(1.0);
    }
    for (const TokenIds &y : generated) {
      xs.push_back(y);
      sign.push_back(-1.0);
    }
    Graph g;
    Var z = ops::Mul(adv_.Logits(g, xs), g.Constant(Tensor({static_cast<int>(sign.size()), 1}, sign)));
    Var loss = ops::Scale(ops::Sum(ops::LogSigmoid(z, std::log(kProbFloor))), -1.0 / n);
    out.adv = loss.value().item();
    g.Backward(loss);
    adv_opt_.Step();
    ++counters_.adv_updates;
  }
  return out;
}

double Trainer::PretrainClassifier(const std::vector<Example> &data, int epochs) {
  if (data.empty()) throw DataError("classifier pretraining needs sentences");
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double last = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    double total = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += config_.batch_size) {
      const size_t end = std::min(order.size(), start + config_.batch_size);
      std::vector<TokenIds> xs;
      std::vector<int> styles;
      std::vector<double> sign;
      for (size_t i = start; i < end; ++i) {
        xs.push_back(data[order[i]].ids);
        styles.push_back(data[order[i]].style);
        sign.push_back(1.0);
      }
      for (size_t i = start; i < end; ++i) {
        xs.push_back(data[order[i]].ids);
        styles.push_back(1 - data[order[i]].style);
        sign.push_back(-1.0);
      }
      Graph g;
      Var z = ops::Mul(cls_.Logits(g, xs, styles),
                       g.Constant(Tensor({static_cast<int>(sign.size()), 1}, sign)));
      Var loss = ops::Scale(ops::Sum(ops::LogSigmoid(z, std::log(kProbFloor))),
                            -1.0 / static_cast<double>(end - start));
      total += loss.value().item();
      ++batches;
      g.Backward(loss);
      cls_opt_.Step();
    }
    last = total / batches;
  }
  return last;
}

StageResult Trainer::Bootstrap(const std::vector<Example> &train, const DevEvalFn &eval) {
  return RunStage("bootstrap", train, eval, config_.bootstrap_weights, config_.bootstrap_epochs,
                  nullptr);
}

StageResult Trainer::Finetune(const std::vector<Example> &train, const DevEvalFn &eval,
                              const CheckpointMeta &stage1) {
  const RewardWeights &w = config_.finetune_weights;
  if (w.sim > 0.0 && config_.content_reward == ContentReward::kSimile && sim_ == nullptr) {
    throw ConfigError("fine-tuning with sim weight > 0 needs an embedding file");
  }
  if (w.lang > 0.0 && lm_ == nullptr) {
    throw ConfigError("fine-tuning with lang weight > 0 needs a language model");
  }
  return RunStage("finetune", train, eval, w, config_.finetune_epochs, &stage1);
}

StageResult Trainer::RunStage(const std::string &stage, const std::vector<Example> &train,
                              const DevEvalFn &eval, const RewardWeights &w, int epochs,
                              const CheckpointMeta *stage1) {
  if (train.empty()) throw DataError("no training sentences");
  StageResult res;
  const NamedTensors start = Snapshot();
  LossTerms sum;
  double sum_total = 0.0;
  int pending = 0;
  long batches = 0;
  int epoch = 0;
  bool have_best = false;
  double best_score = -std::numeric_limits<double>::infinity();
  long last_eval = -1;

  auto evaluate = [&]() {
    MetricsRecord rec;
    rec.stage = stage;
    rec.epoch = epoch;
    rec.batch = batches;
    rec.dev = eval(gen_);
    if (pending > 0) {
      const double k = 1.0 / pending;
      rec.losses = {sum.cls * k, sum.adv * k, sum.sim * k, sum.lang * k, sum.rec * k, sum.cyc * k};
      rec.total_loss = sum_total * k;
    }
    sum = LossTerms();
    sum_total = 0.0;
    pending = 0;
    last_eval = batches;
    res.history.push_back(rec);
    if (metrics_out_ != nullptr) *metrics_out_ << rec.ToJsonLine() << "\n" << std::flush;
    bool better;
    if (stage1 == nullptr) {
      better = Stage1Score(rec.dev) > best_score;
      if (better) best_score = Stage1Score(rec.dev);
    } else {
      better = Stage2Qualifies(rec.dev, *stage1) &&
               (!have_best || rec.dev.perplexity < res.selected.perplexity);
    }
    if (better) {
      have_best = true;
      res.selected = CheckpointMeta::FromRecord(rec);
      res.snapshot = Snapshot();
      if (save_) save_(res.selected, res.snapshot);
    }
  };

  const bool update_cls = config_.cls_mode == ClassifierMode::kAdversarial && w.cls > 0.0;
  const bool update_adv = w.adv > 0.0;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  try {
    bool capped = false;
    for (epoch = 0; epoch < epochs && !capped; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng_);
      for (size_t begin = 0; begin < order.size(); begin += config_.batch_size) {
        if (config_.max_batches > 0 && batches >= config_.max_batches) {
          capped = true;
          break;
        }
        std::vector<Example> batch;
        for (size_t i = begin; i < std::min(order.size(), begin + config_.batch_size); ++i) {
          batch.push_back(train[order[i]]);
        }
        StepResult step = GeneratorStep(batch, w);
        if (update_cls || update_adv) UpdateDiscriminators(batch, step.outputs, update_cls, update_adv);
        sum.cls += step.losses.cls;
        sum.adv += step.losses.adv;
        sum.sim += step.losses.sim;
        sum.lang += step.losses.lang;
        sum.rec += step.losses.rec;
        sum.cyc += step.losses.cyc;
        sum_total += step.total;
        ++pending;
        ++batches;
        if (batches % config_.eval_interval == 0) evaluate();
      }
    }
    epoch = std::max(0, epoch - 1);
    if (last_eval != batches) evaluate();
  } catch (const CheckError &) {
    res.diverged = true;
    Restore(have_best ? res.snapshot : start);
    if (res.history.empty()) evaluate();
  }

  if (stage1 == nullptr) {
    const size_t idx = SelectStage1(res.history);
    if (res.history[idx].batch != res.selected.batch) throw CheckError("stage 1 selection mismatch");
  } else {
    std::optional<size_t> idx = SelectStage2(res.history, *stage1);
    if (!idx) {
      res.selected = *stage1;
      res.selected.fallback = true;
      res.snapshot = start;
      have_best = true;
    } else if (res.history[*idx].batch != res.selected.batch) {
      throw CheckError("stage 2 selection mismatch");
    }
  }
  if (!keep_final_ || res.diverged) Restore(res.snapshot);
  return res;
}

}  // namespace stylerl
