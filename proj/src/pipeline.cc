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

#include "stylerl/pipeline.h"

#include <filesystem>
#include <fstream>

#include "stylerl/bleu.h"
#include "stylerl/errors.h"

namespace stylerl {
namespace {

uint64_t SubSeed(uint64_t seed, uint64_t k) { return seed * 1000003ULL + k; }

std::vector<Parameter *> AllParams(Models &m) {
  std::vector<Parameter *> p = m.gen.Params();
  for (Parameter *q : m.cls.Params()) p.push_back(q);
  for (Parameter *q : m.adv.Params()) p.push_back(q);
  for (Parameter *q : m.fluency_lm.Params()) p.push_back(q);
  return p;
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SyntheticSpec EffectiveSyntheticSpec(const Config &config) {
  SyntheticSpec spec = config.synth;
  if (config.synth_skew) {
    if (!spec.skew) spec.skew = PlantedSkew();
  } else {
    spec.skew.reset();
  }
  return spec;
}

Workspace PrepareWorkspace(const Config &config) {
  StyledCorpus corpus = LoadCorpus(config.corpus_dir);
  std::optional<SimModel> sim;
  if (!config.embeddings.empty() && std::filesystem::exists(config.embeddings)) {
    sim = LoadEmbeddings(config.embeddings);
  }
  return PrepareWorkspace(config, std::move(corpus), std::move(sim));
}

Workspace PrepareWorkspace(const Config &config, StyledCorpus corpus, std::optional<SimModel> sim) {
  Workspace ws;
  ws.corpus = std::move(corpus);
  ws.heldout = SplitHeldout(ws.corpus, config.heldout_fraction);
  std::vector<Sentence> all = StyledCorpus::AllSentences(ws.corpus.train);
  for (const Sentence &s : StyledCorpus::AllSentences(ws.heldout)) all.push_back(s);
  ws.vocab = BuildVocab(all, config.vocab_max, config.vocab_min_freq);
  ws.sim = std::move(sim);
  return ws;
}

std::vector<Example> EncodeSplit(const StyleSplit &split, const Vocab &vocab) {
  std::vector<Example> out;
  for (int s = 0; s < 2; ++s) {
    for (const Sentence &x : split[s]) {
      if (!x.empty()) out.push_back({vocab.Encode(x), s});
    }
  }
  return out;
}

std::unique_ptr<Models> MakeModels(const Config &config, int vocab_size) {
  const uint64_t seed = config.train.seed;
  auto m = std::make_unique<Models>();
  m->gen = Generator({vocab_size, config.gen_embed, config.gen_hidden}, SubSeed(seed, 1));
  ClassifierConfig cc;
  cc.vocab_size = vocab_size;
  cc.embed_dim = config.cls_embed;
  cc.filters = config.cls_filters;
  cc.style_dim = config.cls_style_dim;
  cc.hidden = config.cls_hidden;
  m->cls = StyleClassifier(cc, SubSeed(seed, 2));
  m->adv = NaturalnessDiscriminator({vocab_size, config.adv_embed, config.adv_hidden}, SubSeed(seed, 3));
  m->fluency_lm = NeuralLM({vocab_size, config.lm_embed, config.lm_hidden}, SubSeed(seed, 4));
  return m;
}

std::unique_ptr<EvalKit> BuildEvalKit(const Config &config, const Workspace &ws) {
  auto kit = std::make_unique<EvalKit>();
  EvalClassifier::TrainOptions co;
  co.epochs = config.eval_clf_epochs;
  co.seed = SubSeed(config.train.seed, 5);
  kit->clf.Train(ws.corpus.train, co);
  kit->lm = NeuralLM({ws.vocab.size(), config.lm_embed, config.lm_hidden}, SubSeed(config.train.seed, 6));
  std::vector<TokenIds> held;
  for (const Example &e : EncodeSplit(ws.heldout, ws.vocab)) held.push_back(e.ids);
  LMFitConfig fc;
  fc.epochs = config.lm_epochs;
  fc.seed = SubSeed(config.train.seed, 7);
  FitLM(kit->lm, held, fc, "heldout");
  return kit;
}

DevEvalFn MakeDevEval(const Config &config, const Workspace &ws, EvalKit &kit) {
  StyleSplit dev = ws.corpus.dev;
  if (config.dev_limit > 0) {
    for (auto &side : dev) {
      if (static_cast<int>(side.size()) > config.dev_limit) side.resize(config.dev_limit);
    }
  }
  auto set = std::make_shared<TransferSet>(TransferSet::FromSplit(dev, std::nullopt));
  const Vocab *vocab = &ws.vocab;
  EvalKit *k = &kit;
  return [set, vocab, k](Generator &gen) {
    std::vector<Sentence> outputs = TransferAll(gen, *vocab, set->sources, set->Targets());
    FillEmpty(outputs);
    DevMetrics m;
    m.accuracy = StyleAccuracy(k->clf, outputs, set->Targets()).accuracy;
    m.self_bleu = CorpusBleu(outputs, set->sources);
    m.perplexity = EvalPerplexity(k->lm, *vocab, outputs);
    return m;
  };
}

TrainOutcome RunTraining(const Config &config, const Workspace &ws, Models &models, EvalKit &kit,
                         const TrainOptions &options) {
  config.Validate();
  const std::vector<Example> train = EncodeSplit(ws.corpus.train, ws.vocab);
  if (train.empty()) throw DataError("empty training split");
  const RewardWeights &fw = config.train.finetune_weights;
  if (options.stages >= 2 && fw.sim > 0.0 && config.train.content_reward == ContentReward::kSimile &&
      !ws.sim) {
    throw ConfigError("embedding file '" + config.embeddings + "' is required when lambda.sim > 0");
  }
  TrainOutcome out;
  std::vector<TokenIds> lm_data;
  for (const Example &e : train) lm_data.push_back(e.ids);
  const bool resume = options.resume_stage1.has_value();
  if (resume && options.stages < 2) throw ConfigError("resuming from stage 1 needs stage 2");
  if (options.stages >= 2 && fw.lang > 0.0 &&
      !(resume && models.fluency_lm.fingerprint() != "unfitted")) {
    LMFitConfig fc;
    fc.epochs = config.lm_epochs;
    fc.seed = SubSeed(config.train.seed, 8);
    out.lm_loss = FitLM(models.fluency_lm, lm_data, fc, "train");
  }

  Trainer trainer(config.train, ws.vocab, models.gen, models.cls, models.adv, &models.fluency_lm,
                  ws.sim ? &*ws.sim : nullptr);
  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    metrics.open(options.metrics_path, std::ios::trunc);
    if (!metrics) throw IoError("cannot write " + options.metrics_path);
    trainer.set_metrics_sink(&metrics);
  }
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);
  // Checkpoints always hold the selected point, even when the models are
  // left at their final weights.
  auto save = [&](const std::string &name, const StageResult &res) {
    if (options.checkpoint_dir.empty()) return std::string();
    const std::string path = (std::filesystem::path(options.checkpoint_dir) / name).string();
    NamedTensors final_weights;
    const bool swap = options.keep_final_weights && !res.diverged;
    if (swap) {
      final_weights = trainer.Snapshot();
      trainer.Restore(res.snapshot);
    }
    SaveCheckpoint(path, ModelCheckpoint(config, ws.vocab, models, res.selected));
    if (swap) trainer.Restore(final_weights);
    return path;
  };

  const DevEvalFn eval = MakeDevEval(config, ws, kit);
  if (resume) {
    out.stage1 = *options.resume_stage1;
  } else {
    out.cls_pretrain_loss = trainer.PretrainClassifier(train, config.train.cls_pretrain_epochs);
    trainer.set_keep_final(options.keep_final_weights && options.stages == 1);
    StageResult s1 = trainer.Bootstrap(train, eval);
    out.history = s1.history;
    out.diverged = s1.diverged;
    out.stage1 = s1.selected;
    out.stage1.path = save("stage1.ckpt", s1);
  }
  if (options.stages >= 2) {
    trainer.set_keep_final(options.keep_final_weights);
    StageResult s2 = trainer.Finetune(train, eval, out.stage1);
    out.history.insert(out.history.end(), s2.history.begin(), s2.history.end());
    out.diverged = out.diverged || s2.diverged;
    out.stage2 = s2.selected;
    out.stage2->path = save("stage2.ckpt", s2);
  }
  out.counters = trainer.counters();
  return out;
}

Checkpoint ModelCheckpoint(const Config &config, const Vocab &vocab, Models &models,
                           const CheckpointMeta &meta) {
  Checkpoint c;
  c.stage = meta.stage;
  c.config_text = config.ToText();
  c.vocab = vocab;
  c.hparams["meta.accuracy"] = Num(meta.accuracy);
  c.hparams["meta.self_bleu"] = Num(meta.self_bleu);
  c.hparams["meta.perplexity"] = Num(meta.perplexity);
  c.hparams["meta.epoch"] = std::to_string(meta.epoch);
  c.hparams["meta.batch"] = std::to_string(meta.batch);
  c.hparams["meta.fallback"] = meta.fallback ? "1" : "0";
  c.hparams["vocab_size"] = std::to_string(vocab.size());
  c.hparams["lm.fingerprint"] = models.fluency_lm.fingerprint();
  ExportParams(AllParams(models), c.tensors);
  return c;
}

CheckpointMeta MetaFromCheckpoint(const Checkpoint &ckpt) {
  CheckpointMeta m;
  m.stage = ckpt.stage;
  m.accuracy = ckpt.ParamDouble("meta.accuracy");
  m.self_bleu = ckpt.ParamDouble("meta.self_bleu");
  m.perplexity = ckpt.ParamDouble("meta.perplexity");
  m.epoch = ckpt.ParamInt("meta.epoch");
  m.batch = ckpt.ParamInt("meta.batch");
  m.fallback = ckpt.Param("meta.fallback") == "1";
  return m;
}

std::unique_ptr<Models> ModelsFromCheckpoint(const Checkpoint &ckpt, Config *config) {
  Config c;
  ApplyConfigText(c, ckpt.config_text);
  if (ckpt.ParamInt("vocab_size") != ckpt.vocab.size()) throw FormatError("vocabulary size mismatch");
  auto m = MakeModels(c, ckpt.vocab.size());
  ImportParams(AllParams(*m), ckpt.tensors);
  m->fluency_lm.set_fingerprint(ckpt.Param("lm.fingerprint"));
  if (config != nullptr) *config = c;
  return m;
}

Checkpoint LMCheckpoint(const std::string &stage, const Vocab &vocab, NeuralLM &lm) {
  Checkpoint c;
  c.stage = stage;
  c.vocab = vocab;
  c.hparams["lm.embed_dim"] = std::to_string(lm.config().embed_dim);
  c.hparams["lm.hidden"] = std::to_string(lm.config().hidden);
  c.hparams["lm.fingerprint"] = lm.fingerprint();
  ExportParams(lm.Params(), c.tensors);
  return c;
}

NeuralLM LMFromCheckpoint(const Checkpoint &ckpt) {
  NeuralLM lm({ckpt.vocab.size(), ckpt.ParamInt("lm.embed_dim"), ckpt.ParamInt("lm.hidden")}, 0);
  ImportParams(lm.Params(), ckpt.tensors);
  lm.set_fingerprint(ckpt.Param("lm.fingerprint"));
  return lm;
}

}  // namespace stylerl
