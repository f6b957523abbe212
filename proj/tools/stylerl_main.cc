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

// Command-line front end: gen-data, train, transfer, evaluate, audit.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "stylerl/checkpoint.h"
#include "stylerl/config.h"
#include "stylerl/corpus.h"
#include "stylerl/errors.h"
#include "stylerl/evaluation.h"
#include "stylerl/pipeline.h"
#include "stylerl/synthetic.h"

namespace fs = std::filesystem;
using namespace stylerl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitFallback = 4;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
};

Config ResolveConfig(const CommonFlags &flags) {
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char *env = std::getenv(kConfigEnv)) path = env;
  }
  Config config = path.empty() ? Config() : LoadConfigFile(path);
  for (const std::string &o : flags.overrides) ApplyOverride(config, o);
  config.Validate();
  return config;
}

void WriteText(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string MetaText(const char *prefix, const CheckpointMeta &m) {
  std::ostringstream out;
  out.precision(17);
  out << prefix << ".accuracy=" << m.accuracy << "\n"
      << prefix << ".self_bleu=" << m.self_bleu << "\n"
      << prefix << ".perplexity=" << m.perplexity << "\n"
      << prefix << ".epoch=" << m.epoch << "\n"
      << prefix << ".batch=" << m.batch << "\n"
      << prefix << ".fallback=" << (m.fallback ? 1 : 0) << "\n"
      << prefix << ".path=" << m.path << "\n";
  return out.str();
}

// Evaluation classifier and LM: loaded from the checkpoint directory when
// present, otherwise trained from the corpus and saved there.
std::unique_ptr<EvalKit> LoadOrBuildEvalKit(const Config &config, const Workspace &ws) {
  const fs::path dir(config.checkpoint_dir);
  const fs::path clf_path = dir / "eval_clf.ckpt", lm_path = dir / "eval_lm.ckpt";
  if (fs::exists(clf_path) && fs::exists(lm_path)) {
    auto kit = std::make_unique<EvalKit>();
    kit->clf = EvalClassifierFromCheckpoint(LoadCheckpoint(clf_path.string()));
    Checkpoint lm = LoadCheckpoint(lm_path.string());
    if (!(lm.vocab == ws.vocab)) throw DataError("evaluation LM vocabulary differs from the corpus");
    kit->lm = LMFromCheckpoint(lm);
    return kit;
  }
  auto kit = BuildEvalKit(config, ws);
  fs::create_directories(dir);
  SaveCheckpoint(clf_path.string(), EvalClassifierCheckpoint(kit->clf));
  SaveCheckpoint(lm_path.string(), LMCheckpoint("eval-lm", ws.vocab, kit->lm));
  return kit;
}

int CmdGenData(const CommonFlags &flags, const std::string &out_dir) {
  Config config = ResolveConfig(flags);
  const std::string dir = out_dir.empty() ? config.corpus_dir : out_dir;
  const SyntheticSpec spec = EffectiveSyntheticSpec(config);
  spec.Validate();
  SyntheticData data = GenerateSynthetic(spec);
  fs::create_directories(dir);
  WriteCorpus(dir, data.corpus);
  const std::string emb = out_dir.empty() ? config.embeddings : (fs::path(dir) / "embeddings.txt").string();
  WriteEmbeddings(emb, data.embeddings);
  for (int s = 0; s < 2; ++s) {
    std::cout << "style " << s << ": train=" << data.corpus.train[s].size()
              << " dev=" << data.corpus.dev[s].size() << " test=" << data.corpus.test[s].size() << "\n";
  }
  std::cout << "embeddings: " << data.embeddings.num_units() << " units, dim "
            << data.embeddings.dim() << " -> " << emb << "\n";
  return kExitOk;
}

int CmdTrain(const CommonFlags &flags, int stages, const std::string &resume) {
  Config config = ResolveConfig(flags);
  if (stages != 1 && stages != 2) throw ConfigError("--stage must be 1 or 2");
  Workspace ws = PrepareWorkspace(config);
  const RewardWeights &fw = config.train.finetune_weights;
  if (stages == 2 && fw.sim > 0.0 && config.train.content_reward == ContentReward::kSimile && !ws.sim) {
    throw ConfigError("embedding file '" + config.embeddings + "' not found (needed because lambda.sim > 0)");
  }
  auto kit = LoadOrBuildEvalKit(config, ws);
  TrainOptions options;
  options.stages = stages;
  std::unique_ptr<Models> models;
  if (resume.empty()) {
    models = MakeModels(config, ws.vocab.size());
  } else {
    if (stages != 2) throw ConfigError("--resume continues with stage 2");
    Checkpoint ckpt = LoadCheckpoint(resume);
    if (!(ckpt.vocab == ws.vocab)) throw DataError(resume + ": vocabulary differs from the corpus");
    models = ModelsFromCheckpoint(ckpt, nullptr);
    options.resume_stage1 = MetaFromCheckpoint(ckpt);
    options.resume_stage1->path = resume;
  }
  options.checkpoint_dir = config.checkpoint_dir;
  options.metrics_path = (fs::path(config.checkpoint_dir) / "metrics.jsonl").string();
  fs::create_directories(config.checkpoint_dir);
  TrainOutcome out = RunTraining(config, ws, *models, *kit, options);

  std::string summary = MetaText("stage1", out.stage1);
  if (out.stage2) summary += MetaText("stage2", *out.stage2);
  summary += "diverged=" + std::to_string(out.diverged ? 1 : 0) + "\n";
  summary += "counters.generator_steps=" + std::to_string(out.counters.generator_steps) + "\n";
  summary += "counters.reinforce_batches=" + std::to_string(out.counters.reinforce_batches) + "\n";
  summary += "counters.soft_unrolls=" + std::to_string(out.counters.soft_unrolls) + "\n";
  summary += "counters.empty_outputs=" + std::to_string(out.counters.empty_outputs) + "\n";
  summary += "counters.skipped_rewards=" + std::to_string(out.counters.skipped_rewards) + "\n";
  summary += ConfigEcho(config);
  WriteText(fs::path(config.report_dir) / "train_summary.txt", summary);
  std::cout << summary.substr(0, summary.find("config."));
  const bool fallback = out.stage2 && out.stage2->fallback;
  if (out.diverged || fallback) {
    std::cerr << (out.diverged ? "training diverged; kept the last good checkpoint\n"
                               : "no stage-2 checkpoint beat stage 1; fell back to stage 1\n");
    return kExitFallback;
  }
  return kExitOk;
}

int CmdTransfer(const CommonFlags &flags, const std::string &ckpt_path, const std::string &input,
                const std::string &output, int style) {
  if (style != 0 && style != 1) throw ConfigError("--style must be 0 or 1");
  (void)ResolveConfig(flags);
  Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  auto models = ModelsFromCheckpoint(ckpt, nullptr);
  std::vector<Sentence> sources;
  for (const std::string &line : ReadLines(input)) sources.push_back(Normalize(line));
  std::vector<Sentence> outputs =
      TransferAll(models->gen, ckpt.vocab, sources, std::vector<int>(sources.size(), style));
  std::string text;
  for (const Sentence &s : outputs) text += Join(s) + "\n";
  WriteText(output, text);
  return kExitOk;
}

struct OutputSource {
  std::string checkpoint;
  std::string outputs_file;
  std::string oracle;
};

std::vector<Sentence> ProduceOutputs(const OutputSource &src, const TransferSet &set) {
  if (!src.oracle.empty()) {
    if (src.oracle != "copy") throw ConfigError("--oracle supports only 'copy'");
    return set.sources;
  }
  if (!src.outputs_file.empty()) {
    std::vector<Sentence> out;
    for (const std::string &line : ReadLines(src.outputs_file)) out.push_back(Normalize(line));
    if (out.size() != set.sources.size()) {
      throw DataError(src.outputs_file + " has " + std::to_string(out.size()) + " lines, expected " +
                      std::to_string(set.sources.size()));
    }
    return out;
  }
  if (src.checkpoint.empty()) throw ConfigError("give --checkpoint, --outputs or --oracle");
  Checkpoint ckpt = LoadCheckpoint(src.checkpoint);
  auto models = ModelsFromCheckpoint(ckpt, nullptr);
  return TransferAll(models->gen, ckpt.vocab, set.sources, set.Targets());
}

int CmdEvaluate(const CommonFlags &flags, const OutputSource &src, const std::string &test_dir) {
  Config config = ResolveConfig(flags);
  Workspace ws = PrepareWorkspace(config);
  if (!ws.sim) throw ConfigError("embedding file '" + config.embeddings + "' not found (needed for SIM)");
  StyledCorpus test = test_dir.empty() ? ws.corpus : LoadCorpus(test_dir);
  TransferSet set = TransferSet::FromSplit(test.test, test.refs);
  auto kit = LoadOrBuildEvalKit(config, ws);
  std::vector<Sentence> outputs = ProduceOutputs(src, set);
  MetricsReport report = EvaluateOutputs(set, outputs, kit->clf, kit->lm, ws.vocab, *ws.sim);
  report.model_id = !src.oracle.empty() ? "oracle:" + src.oracle
                    : !src.outputs_file.empty() ? "outputs:" + src.outputs_file
                                                 : "checkpoint:" + src.checkpoint;
  report.config_id = config.Id();
  const std::string text = report.ToKeyValue();
  WriteText(fs::path(config.report_dir) / "metrics.txt", text + ConfigEcho(config));
  WriteText(fs::path(config.report_dir) / "metrics.csv", report.CsvHeader() + "\n" + report.CsvRow() + "\n");
  std::cout << text;
  return kExitOk;
}

int CmdAudit(const CommonFlags &flags, const OutputSource &src) {
  Config config = ResolveConfig(flags);
  Workspace ws = PrepareWorkspace(config);
  TransferSet set = TransferSet::FromSplit(ws.corpus.test, std::nullopt);
  auto kit = LoadOrBuildEvalKit(config, ws);
  std::vector<Sentence> outputs = ProduceOutputs(src, set);
  StyleSplit corpus = ws.corpus.train;
  for (int s = 0; s < 2; ++s) corpus[s].insert(corpus[s].end(), ws.heldout[s].begin(), ws.heldout[s].end());
  AuditReport report =
      Audit(kit->clf, corpus, set, outputs, config.audit_min_count, config.audit_skew_threshold);
  const std::string text = report.ToKeyValue();
  WriteText(fs::path(config.report_dir) / "audit.txt", text + ConfigEcho(config));
  WriteText(fs::path(config.report_dir) / "skew.csv", report.SkewCsv());
  std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Reward-driven unsupervised text style transfer"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--config", flags.config_path,
                 std::string("Config file (key = value lines); default from $") + kConfigEnv)
      ->check(CLI::ExistingFile);
  app.add_option("--set", flags.overrides, "Override one config key, e.g. --set lambda.sim=10")
      ->allow_extra_args(false);

  std::string gen_out;
  CLI::App *gen = app.add_subcommand("gen-data", "Write the synthetic corpus and embedding file");
  gen->add_option("--out", gen_out, "Output directory (default: corpus_dir)");

  int stages = 2;
  CLI::App *train = app.add_subcommand("train", "Run bootstrap and fine-tuning");
  train->add_option("--stage", stages, "Stop after this stage (1 or 2)");
  std::string resume;
  train->add_option("--resume", resume, "Stage-1 checkpoint to fine-tune from");

  std::string ckpt, input, output;
  int style = -1;
  CLI::App *transfer = app.add_subcommand("transfer", "Transfer sentences with a checkpoint");
  transfer->add_option("--checkpoint", ckpt, "Model checkpoint")->required();
  transfer->add_option("--input", input, "One sentence per line")->required();
  transfer->add_option("--output", output, "Output file")->required();
  transfer->add_option("--style", style, "Target style (0 or 1)")->required();

  OutputSource src;
  std::string test_dir;
  CLI::App *evaluate = app.add_subcommand(
      "evaluate",
      "Score outputs. Writes metrics.txt (accuracy, perplexity, self_bleu, ref_bleu, self_sim, "
      "ref_sim, samples, empty_feature, empty_outputs, bleu_variant, model_id, config_id, "
      "config.*) and metrics.csv to report_dir");
  evaluate->add_option("--checkpoint", src.checkpoint, "Model checkpoint");
  evaluate->add_option("--outputs", src.outputs_file, "Outputs file aligned with test.0 then test.1");
  evaluate->add_option("--oracle", src.oracle, "Built-in system: copy");
  evaluate->add_option("--test-dir", test_dir, "Corpus directory whose test split is scored");

  OutputSource audit_src;
  CLI::App *audit = app.add_subcommand(
      "audit",
      "Metric-gaming probes. Writes audit.txt (accuracy_before, accuracy_after, "
      "ablation_drop_points, injection_rate, min_count, skew_threshold, flagged_count, flagged, "
      "config.*) and skew.csv to report_dir");
  audit->add_option("--checkpoint", audit_src.checkpoint, "Model checkpoint");
  audit->add_option("--outputs", audit_src.outputs_file, "Outputs file aligned with test.0 then test.1");

  for (CLI::App *sub : {gen, train, transfer, evaluate, audit}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return CmdGenData(flags, gen_out);
    if (train->parsed()) return CmdTrain(flags, stages, resume);
    if (transfer->parsed()) return CmdTransfer(flags, ckpt, input, output, style);
    if (evaluate->parsed()) return CmdEvaluate(flags, src, test_dir);
    if (audit->parsed()) return CmdAudit(flags, audit_src);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
