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

#include "stylerl/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "stylerl/bleu.h"
#include "stylerl/errors.h"
#include "stylerl/kernels.h"

namespace stylerl {
namespace {

uint64_t Fnv1a(std::string_view s, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string &key, const std::string &text) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception &) {
    throw FormatError("report field '" + key + "' is not a number: '" + text + "'");
  }
}

std::string CsvField(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

constexpr const char *kBleuVariant = "corpus-4gram-addone-n2plus";

}  // namespace

EvalClassifier::EvalClassifier() : seen_(kBuckets, 0) {
  for (auto &w : w_) w.assign(kBuckets, 0.0);
}

std::vector<uint32_t> EvalClassifier::Features(const Sentence &x) {
  std::vector<uint32_t> out;
  for (size_t i = 0; i < x.size(); ++i) {
    out.push_back(static_cast<uint32_t>(Fnv1a(x[i], Fnv1a("u\x1f")) % kBuckets));
    if (i + 1 < x.size()) {
      const uint64_t h = Fnv1a(x[i + 1], Fnv1a("\x1f", Fnv1a(x[i], Fnv1a("b\x1f"))));
      out.push_back(static_cast<uint32_t>(h % kBuckets));
    }
  }
  return out;
}

void EvalClassifier::Train(const StyleSplit &data, const TrainOptions &options) {
  struct Example {
    std::vector<uint32_t> features;
    int style;
  };
  std::vector<Example> examples;
  for (int s = 0; s < 2; ++s) {
    for (const Sentence &x : data[s]) examples.push_back({Features(x), s});
  }
  if (examples.empty()) throw DataError("eval classifier: no training sentences");
  for (const Example &e : examples) {
    for (uint32_t f : e.features) seen_[f] = 1;
  }
  std::mt19937_64 rng(options.seed);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i : order) {
      const Example &e = examples[i];
      std::array<double, 2> z = b_;
      for (int c = 0; c < 2; ++c) {
        for (uint32_t f : e.features) z[c] += w_[c][f];
      }
      const double m = std::max(z[0], z[1]);
      const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
      const std::array<double, 2> p = {e0 / (e0 + e1), e1 / (e0 + e1)};
      for (int c = 0; c < 2; ++c) {
        const double g = p[c] - (c == e.style ? 1.0 : 0.0);
        b_[c] -= options.lr * g;
        for (uint32_t f : e.features) w_[c][f] -= options.lr * g;
      }
    }
  }
}

double EvalClassifier::LogOdds(const Sentence &x) const {
  double z = b_[1] - b_[0];
  for (uint32_t f : Features(x)) z += w_[1][f] - w_[0][f];
  return z;
}

bool EvalClassifier::EmptyFeatures(const Sentence &x) const {
  for (uint32_t f : Features(x)) {
    if (seen_[f]) return false;
  }
  return true;
}

AccuracyResult StyleAccuracy(const EvalClassifier &clf, const std::vector<Sentence> &outputs,
                             const std::vector<int> &targets) {
  if (outputs.empty()) throw ContractError("accuracy of an empty output list");
  if (outputs.size() != targets.size()) throw ContractError("outputs/targets mismatch");
  AccuracyResult r;
  long hits = 0;
  for (size_t i = 0; i < outputs.size(); ++i) {
    if (clf.EmptyFeatures(outputs[i])) ++r.empty_feature;
    if (clf.Predict(outputs[i]) == targets[i]) ++hits;
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(outputs.size());
  return r;
}

double EvalPerplexity(NeuralLM &lm, const Vocab &vocab, const std::vector<Sentence> &outputs) {
  std::vector<TokenIds> ids;
  ids.reserve(outputs.size());
  for (const Sentence &s : outputs) ids.push_back(vocab.Encode(s));
  return lm.CorpusPerplexity(ids);
}

double MeanSim(const SimModel &sim, const std::vector<Sentence> &a, const std::vector<Sentence> &b) {
  if (a.size() != b.size() || a.empty()) throw ContractError("sim: bad pair lists");
  std::vector<double> scores(a.size());
  kernels::ParallelFor(static_cast<int>(a.size()), [&](int i) { scores[i] = sim.Score(a[i], b[i]); });
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(a.size());
}

std::string MetricsReport::ToKeyValue() const {
  std::ostringstream out;
  out << "accuracy=" << FormatDouble(accuracy) << "\n";
  out << "perplexity=" << FormatDouble(perplexity) << "\n";
  out << "self_bleu=" << FormatDouble(self_bleu) << "\n";
  out << "ref_bleu=" << (ref_bleu ? FormatDouble(*ref_bleu) : "absent") << "\n";
  out << "self_sim=" << FormatDouble(self_sim) << "\n";
  out << "ref_sim=" << (ref_sim ? FormatDouble(*ref_sim) : "absent") << "\n";
  out << "samples=" << samples << "\n";
  out << "empty_feature=" << empty_feature << "\n";
  out << "empty_outputs=" << empty_outputs << "\n";
  out << "bleu_variant=" << kBleuVariant << "\n";
  out << "model_id=" << model_id << "\n";
  out << "config_id=" << config_id << "\n";
  return out.str();
}

MetricsReport MetricsReport::FromKeyValue(const std::string &text) {
  MetricsReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("report line without '=': " + line);
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    // The effective configuration is echoed into reports; see ConfigFromReport.
    if (key.rfind("config.", 0) == 0) continue;
    auto optional = [&](std::optional<double> &slot) {
      if (value == "absent") {
        slot.reset();
      } else {
        slot = ParseDouble(key, value);
      }
    };
    if (key == "accuracy") {
      r.accuracy = ParseDouble(key, value);
    } else if (key == "perplexity") {
      r.perplexity = ParseDouble(key, value);
    } else if (key == "self_bleu") {
      r.self_bleu = ParseDouble(key, value);
    } else if (key == "ref_bleu") {
      optional(r.ref_bleu);
    } else if (key == "self_sim") {
      r.self_sim = ParseDouble(key, value);
    } else if (key == "ref_sim") {
      optional(r.ref_sim);
    } else if (key == "samples") {
      r.samples = static_cast<int>(ParseDouble(key, value));
    } else if (key == "empty_feature") {
      r.empty_feature = static_cast<int>(ParseDouble(key, value));
    } else if (key == "empty_outputs") {
      r.empty_outputs = static_cast<int>(ParseDouble(key, value));
    } else if (key == "bleu_variant") {
      if (value != kBleuVariant) throw FormatError("unknown BLEU variant '" + value + "'");
    } else if (key == "model_id") {
      r.model_id = value;
    } else if (key == "config_id") {
      r.config_id = value;
    } else {
      throw FormatError("unknown report field '" + key + "'");
    }
  }
  return r;
}

std::string MetricsReport::CsvHeader() const {
  return "accuracy,perplexity,self_bleu,ref_bleu,self_sim,ref_sim,samples,model_id,config_id";
}

std::string MetricsReport::CsvRow() const {
  std::ostringstream out;
  out << FormatDouble(accuracy) << "," << FormatDouble(perplexity) << ","
      << FormatDouble(self_bleu) << "," << (ref_bleu ? FormatDouble(*ref_bleu) : "") << ","
      << FormatDouble(self_sim) << "," << (ref_sim ? FormatDouble(*ref_sim) : "") << ","
      << samples << "," << CsvField(model_id) << "," << CsvField(config_id);
  return out.str();
}

TransferSet TransferSet::FromSplit(const StyleSplit &split, const std::optional<StyleSplit> &refs) {
  TransferSet set;
  for (int s = 0; s < 2; ++s) {
    for (const Sentence &x : split[s]) {
      set.sources.push_back(x);
      set.source_styles.push_back(s);
    }
  }
  if (refs) {
    set.refs.emplace();
    for (int s = 0; s < 2; ++s) {
      if ((*refs)[s].size() != split[s].size()) throw DataError("references not aligned with sources");
      for (const Sentence &r : (*refs)[s]) set.refs->push_back(r);
    }
  }
  return set;
}

std::vector<int> TransferSet::Targets() const {
  std::vector<int> t;
  for (int s : source_styles) t.push_back(1 - s);
  return t;
}

int FillEmpty(std::vector<Sentence> &outputs) {
  int n = 0;
  for (Sentence &s : outputs) {
    if (s.empty()) {
      s = {"<unk>"};
      ++n;
    }
  }
  return n;
}

MetricsReport EvaluateOutputs(const TransferSet &set, std::vector<Sentence> outputs,
                              const EvalClassifier &clf, NeuralLM &lm, const Vocab &vocab,
                              const SimModel &sim) {
  if (outputs.size() != set.sources.size()) {
    throw DataError("got " + std::to_string(outputs.size()) + " outputs for " +
                    std::to_string(set.sources.size()) + " sources");
  }
  MetricsReport r;
  r.samples = static_cast<int>(outputs.size());
  r.empty_outputs = FillEmpty(outputs);
  AccuracyResult acc = StyleAccuracy(clf, outputs, set.Targets());
  r.accuracy = acc.accuracy;
  r.empty_feature = acc.empty_feature;
  r.perplexity = EvalPerplexity(lm, vocab, outputs);
  r.self_bleu = CorpusBleu(outputs, set.sources);
  r.self_sim = MeanSim(sim, set.sources, outputs);
  if (set.refs) {
    r.ref_bleu = CorpusBleu(outputs, *set.refs);
    r.ref_sim = MeanSim(sim, *set.refs, outputs);
  }
  return r;
}

std::vector<Sentence> TransferAll(Generator &gen, const Vocab &vocab,
                                  const std::vector<Sentence> &sources,
                                  const std::vector<int> &targets, int batch_size) {
  std::vector<Sentence> out(sources.size());
  const int n = static_cast<int>(sources.size());
  const int batches = (n + batch_size - 1) / batch_size;
  kernels::ParallelFor(batches, [&](int k) {
    const int begin = k * batch_size, end = std::min(n, begin + batch_size);
    std::vector<TokenIds> xs;
    std::vector<int> styles, lens;
    for (int i = begin; i < end; ++i) {
      TokenIds ids = vocab.Encode(sources[i]);
      if (ids.empty()) ids = {kUnk};
      lens.push_back(DefaultMaxLen(ids));
      xs.push_back(std::move(ids));
      styles.push_back(targets[i]);
    }
    std::vector<TokenIds> ys = gen.Greedy(xs, styles, lens);
    for (int i = begin; i < end; ++i) out[i] = vocab.Decode(ys[i - begin]);
  });
  return out;
}

MetricsReport EvaluateAll(Generator &gen, const Vocab &vocab, const TransferSet &set,
                          const EvalClassifier &clf, NeuralLM &lm, const SimModel &sim) {
  return EvaluateOutputs(set, TransferAll(gen, vocab, set.sources, set.Targets()), clf, lm, vocab,
                         sim);
}

AblationResult FirstTokenAblation(const EvalClassifier &clf, const std::vector<Sentence> &outputs,
                                  const std::vector<int> &targets) {
  std::vector<Sentence> cut;
  cut.reserve(outputs.size());
  for (const Sentence &s : outputs) {
    if (s.size() <= 1) {
      cut.push_back({"<unk>"});
    } else {
      cut.emplace_back(s.begin() + 1, s.end());
    }
  }
  return {StyleAccuracy(clf, outputs, targets).accuracy, StyleAccuracy(clf, cut, targets).accuracy};
}

double SkewScore(long c0, long c1) {
  if (c0 + c1 == 0) return 0.5;
  return static_cast<double>(std::max(c0, c1)) / static_cast<double>(c0 + c1);
}

std::vector<SkewEntry> ClassSkewAudit(const StyleSplit &corpus, const std::vector<Sentence> &sources,
                                      const std::vector<Sentence> &outputs, int min_count,
                                      double skew_threshold) {
  if (min_count < 1) throw ContractError("audit: min_count must be >= 1");
  if (!(skew_threshold > 0.5 && skew_threshold <= 1.0)) {
    throw ContractError("audit: skew threshold must be in (0.5, 1]");
  }
  std::map<std::string, std::array<long, 2>> counts;
  for (int s = 0; s < 2; ++s) {
    for (const Sentence &x : corpus[s]) {
      for (const std::string &t : x) ++counts[t][s];
    }
  }
  std::unordered_map<std::string, long> out_counts, src_counts;
  for (const Sentence &x : outputs) {
    for (const std::string &t : x) ++out_counts[t];
  }
  for (const Sentence &x : sources) {
    for (const std::string &t : x) ++src_counts[t];
  }
  std::vector<SkewEntry> table;
  for (const auto &[token, c] : counts) {
    if (c[0] + c[1] < min_count) continue;
    SkewEntry e;
    e.token = token;
    e.count0 = c[0];
    e.count1 = c[1];
    e.skew = SkewScore(c[0], c[1]);
    e.output_count = out_counts.count(token) ? out_counts[token] : 0;
    e.source_count = src_counts.count(token) ? src_counts[token] : 0;
    e.flagged = e.skew >= skew_threshold &&
                static_cast<double>(e.output_count) >=
                    kOverproductionRatio * static_cast<double>(std::max<long>(e.source_count, 1));
    table.push_back(std::move(e));
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const SkewEntry &a, const SkewEntry &b) { return a.skew > b.skew; });
  return table;
}

double InjectionRate(const EvalClassifier &clf, const std::vector<Sentence> &sources,
                     const std::vector<Sentence> &outputs, const std::vector<int> &targets) {
  if (outputs.empty()) return 0.0;
  if (sources.size() != outputs.size() || targets.size() != outputs.size()) {
    throw ContractError("injection rate: list sizes differ");
  }
  long hits = 0;
  for (size_t i = 0; i < outputs.size(); ++i) {
    const Sentence &y = outputs[i];
    if (y.size() < 2) continue;
    if (!sources[i].empty() && sources[i][0] == y[0]) continue;
    if (clf.Predict(y) != targets[i]) continue;
    if (clf.Predict(Sentence(y.begin() + 1, y.end())) == targets[i]) continue;
    ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

double OverproductionRatio(const std::string &token, const std::vector<Sentence> &sources,
                           const std::vector<Sentence> &outputs) {
  auto count = [&token](const std::vector<Sentence> &xs) {
    long n = 0;
    for (const Sentence &x : xs) n += std::count(x.begin(), x.end(), token);
    return n;
  };
  return static_cast<double>(count(outputs)) / static_cast<double>(std::max<long>(count(sources), 1));
}

AuditReport Audit(const EvalClassifier &clf, const StyleSplit &corpus, const TransferSet &set,
                  const std::vector<Sentence> &outputs, int min_count, double skew_threshold) {
  std::vector<Sentence> filled = outputs;
  FillEmpty(filled);
  AuditReport r;
  r.min_count = min_count;
  r.skew_threshold = skew_threshold;
  const std::vector<int> targets = set.Targets();
  r.ablation = FirstTokenAblation(clf, filled, targets);
  r.skew_table = ClassSkewAudit(corpus, set.sources, filled, min_count, skew_threshold);
  for (const SkewEntry &e : r.skew_table) {
    if (e.flagged) r.flagged.push_back(e.token);
  }
  r.injection_rate = InjectionRate(clf, set.sources, filled, targets);
  return r;
}

std::string AuditReport::ToKeyValue() const {
  std::ostringstream out;
  out << "accuracy_before=" << FormatDouble(ablation.before) << "\n";
  out << "accuracy_after=" << FormatDouble(ablation.after) << "\n";
  out << "ablation_drop_points=" << FormatDouble(ablation.drop_points()) << "\n";
  out << "injection_rate=" << FormatDouble(injection_rate) << "\n";
  out << "min_count=" << min_count << "\n";
  out << "skew_threshold=" << FormatDouble(skew_threshold) << "\n";
  out << "flagged_count=" << flagged.size() << "\n";
  out << "flagged=";
  for (size_t i = 0; i < flagged.size(); ++i) out << (i ? "," : "") << flagged[i];
  out << "\n";
  return out.str();
}

std::string AuditReport::SkewCsv() const {
  std::ostringstream out;
  out << "token,count0,count1,skew,output_count,source_count,flagged\n";
  for (const SkewEntry &e : skew_table) {
    out << CsvField(e.token) << "," << e.count0 << "," << e.count1 << "," << FormatDouble(e.skew)
        << "," << e.output_count << "," << e.source_count << "," << (e.flagged ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace stylerl
