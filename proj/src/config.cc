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

#include "stylerl/config.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "stylerl/errors.h"

namespace stylerl {
namespace {

struct Field {
  std::function<std::string(const Config &)> get;
  std::function<void(Config &, const std::string &)> set;
};

std::string Fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ToDouble(const std::string &key, const std::string &v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception &) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

long long ToInt(const std::string &key, const std::string &v) {
  try {
    size_t used = 0;
    long long d = std::stoll(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception &) {
  }
  throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
}

bool ToBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string Trim(const std::string &s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string &v) {
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string JoinList(const std::vector<std::string> &v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

using Registry = std::vector<std::pair<std::string, Field>>;

template <typename T>
void AddInt(Registry &r, const std::string &key, T Config::*member) {
  r.push_back({key,
               {[member](const Config &c) { return std::to_string(c.*member); },
                [member, key](Config &c, const std::string &v) { c.*member = static_cast<T>(ToInt(key, v)); }}});
}

void AddDouble(Registry &r, const std::string &key, double Config::*member) {
  r.push_back({key,
               {[member](const Config &c) { return Fmt(c.*member); },
                [member, key](Config &c, const std::string &v) { c.*member = ToDouble(key, v); }}});
}

void AddString(Registry &r, const std::string &key, std::string Config::*member) {
  r.push_back({key,
               {[member](const Config &c) { return c.*member; },
                [member](Config &c, const std::string &v) { c.*member = v; }}});
}

template <typename Get, typename Set>
void AddCustom(Registry &r, const std::string &key, Get get, Set set) {
  r.push_back({key, {get, set}});
}

// Accessors for nested fields.
#define STYLERL_NUM_FIELD(reg, key, expr, parse)                                        \
  AddCustom(                                                                            \
      reg, key, [](const Config &c) { return Fmt(static_cast<double>(c.expr)); },      \
      [](Config &c, const std::string &v) { c.expr = static_cast<decltype(c.expr)>(parse(key, v)); })

const Registry &Fields() {
  static const Registry registry = [] {
    Registry r;
    AddString(r, "corpus_dir", &Config::corpus_dir);
    AddString(r, "embeddings", &Config::embeddings);
    AddString(r, "checkpoint_dir", &Config::checkpoint_dir);
    AddString(r, "report_dir", &Config::report_dir);

    STYLERL_NUM_FIELD(r, "synth.train", synth.train_per_style, ToInt);
    STYLERL_NUM_FIELD(r, "synth.dev", synth.dev_per_style, ToInt);
    STYLERL_NUM_FIELD(r, "synth.test", synth.test_per_style, ToInt);
    STYLERL_NUM_FIELD(r, "synth.seed", synth.seed, ToInt);
    STYLERL_NUM_FIELD(r, "synth.strong_rate", synth.strong_rate, ToDouble);
    STYLERL_NUM_FIELD(r, "synth.mild_noise", synth.mild_noise, ToDouble);
    STYLERL_NUM_FIELD(r, "synth.embedding_dim", synth.embedding_dim, ToInt);
    STYLERL_NUM_FIELD(r, "synth.noun_norm", synth.noun_norm, ToDouble);
    STYLERL_NUM_FIELD(r, "synth.synonym_noise", synth.synonym_noise, ToDouble);
    AddCustom(
        r, "synth.skew", [](const Config &c) { return std::string(c.synth_skew ? "true" : "false"); },
        [](Config &c, const std::string &v) { c.synth_skew = ToBool("synth.skew", v); });
    AddCustom(
        r, "synth.skew_token", [](const Config &c) { return c.synth.skew ? c.synth.skew->token : PlantedSkew().token; },
        [](Config &c, const std::string &v) {
          if (!c.synth.skew) c.synth.skew = PlantedSkew();
          c.synth.skew->token = v;
        });
    AddCustom(
        r, "synth.skew_style",
        [](const Config &c) { return std::to_string(c.synth.skew ? c.synth.skew->style : PlantedSkew().style); },
        [](Config &c, const std::string &v) {
          if (!c.synth.skew) c.synth.skew = PlantedSkew();
          c.synth.skew->style = static_cast<int>(ToInt("synth.skew_style", v));
        });
    AddCustom(
        r, "synth.skew_p",
        [](const Config &c) { return Fmt(c.synth.skew ? c.synth.skew->probability : PlantedSkew().probability); },
        [](Config &c, const std::string &v) {
          if (!c.synth.skew) c.synth.skew = PlantedSkew();
          c.synth.skew->probability = ToDouble("synth.skew_p", v);
        });
    AddCustom(
        r, "synth.skew_rate",
        [](const Config &c) { return Fmt(c.synth.skew ? c.synth.skew->rate : PlantedSkew().rate); },
        [](Config &c, const std::string &v) {
          if (!c.synth.skew) c.synth.skew = PlantedSkew();
          c.synth.skew->rate = ToDouble("synth.skew_rate", v);
        });
    AddCustom(
        r, "synth.nouns", [](const Config &c) { return JoinList(c.synth.nouns); },
        [](Config &c, const std::string &v) { c.synth.nouns = SplitList(v); });

    AddInt(r, "vocab_max", &Config::vocab_max);
    AddInt(r, "vocab_min_freq", &Config::vocab_min_freq);
    AddInt(r, "gen.embed_dim", &Config::gen_embed);
    AddInt(r, "gen.hidden", &Config::gen_hidden);
    AddInt(r, "cls.embed_dim", &Config::cls_embed);
    AddInt(r, "cls.filters", &Config::cls_filters);
    AddInt(r, "cls.style_dim", &Config::cls_style_dim);
    AddInt(r, "cls.hidden", &Config::cls_hidden);
    AddInt(r, "adv.embed_dim", &Config::adv_embed);
    AddInt(r, "adv.hidden", &Config::adv_hidden);
    AddInt(r, "lm.embed_dim", &Config::lm_embed);
    AddInt(r, "lm.hidden", &Config::lm_hidden);
    AddInt(r, "lm.epochs", &Config::lm_epochs);
    AddDouble(r, "heldout_fraction", &Config::heldout_fraction);
    AddInt(r, "eval_clf.epochs", &Config::eval_clf_epochs);
    AddInt(r, "dev_limit", &Config::dev_limit);

    STYLERL_NUM_FIELD(r, "batch_size", train.batch_size, ToInt);
    STYLERL_NUM_FIELD(r, "lr_gen", train.lr_gen, ToDouble);
    STYLERL_NUM_FIELD(r, "lr_cls", train.lr_cls, ToDouble);
    STYLERL_NUM_FIELD(r, "lr_adv", train.lr_adv, ToDouble);
    STYLERL_NUM_FIELD(r, "clip_norm", train.clip_norm, ToDouble);
    STYLERL_NUM_FIELD(r, "bootstrap_epochs", train.bootstrap_epochs, ToInt);
    STYLERL_NUM_FIELD(r, "finetune_epochs", train.finetune_epochs, ToInt);
    STYLERL_NUM_FIELD(r, "max_batches", train.max_batches, ToInt);
    STYLERL_NUM_FIELD(r, "eval_interval", train.eval_interval, ToInt);
    STYLERL_NUM_FIELD(r, "cls_pretrain_epochs", train.cls_pretrain_epochs, ToInt);
    STYLERL_NUM_FIELD(r, "seed", train.seed, ToInt);
    AddCustom(
        r, "classifier_mode", [](const Config &c) { return ClassifierModeName(c.train.cls_mode); },
        [](Config &c, const std::string &v) { c.train.cls_mode = ParseClassifierMode(v); });
    AddCustom(
        r, "lp_variant", [](const Config &c) { return LpVariantName(c.train.lp_variant); },
        [](Config &c, const std::string &v) { c.train.lp_variant = ParseLpVariant(v); });
    AddCustom(
        r, "content_reward", [](const Config &c) { return ContentRewardName(c.train.content_reward); },
        [](Config &c, const std::string &v) { c.train.content_reward = ParseContentReward(v); });
    AddCustom(
        r, "lang_norm", [](const Config &c) { return RewardNormName(c.train.lang_norm); },
        [](Config &c, const std::string &v) { c.train.lang_norm = ParseRewardNorm(v); });
    AddCustom(
        r, "rollout", [](const Config &c) { return RolloutModeName(c.train.rollout); },
        [](Config &c, const std::string &v) { c.train.rollout = ParseRolloutMode(v); });

    STYLERL_NUM_FIELD(r, "lambda.cls", train.finetune_weights.cls, ToDouble);
    STYLERL_NUM_FIELD(r, "lambda.adv", train.finetune_weights.adv, ToDouble);
    STYLERL_NUM_FIELD(r, "lambda.sim", train.finetune_weights.sim, ToDouble);
    STYLERL_NUM_FIELD(r, "lambda.lang", train.finetune_weights.lang, ToDouble);
    STYLERL_NUM_FIELD(r, "lambda.rec", train.finetune_weights.rec, ToDouble);
    STYLERL_NUM_FIELD(r, "lambda.cyc", train.finetune_weights.cyc, ToDouble);
    STYLERL_NUM_FIELD(r, "alpha", train.finetune_weights.alpha, ToDouble);
    STYLERL_NUM_FIELD(r, "boot.cyc", train.bootstrap_weights.cyc, ToDouble);
    STYLERL_NUM_FIELD(r, "boot.cls", train.bootstrap_weights.cls, ToDouble);
    STYLERL_NUM_FIELD(r, "boot.rec", train.bootstrap_weights.rec, ToDouble);
    STYLERL_NUM_FIELD(r, "boot.adv", train.bootstrap_weights.adv, ToDouble);
    STYLERL_NUM_FIELD(r, "boot.sim", train.bootstrap_weights.sim, ToDouble);
    STYLERL_NUM_FIELD(r, "boot.lang", train.bootstrap_weights.lang, ToDouble);

    AddInt(r, "audit.min_count", &Config::audit_min_count);
    AddDouble(r, "audit.skew_threshold", &Config::audit_skew_threshold);
    return r;
  }();
  return registry;
}

#undef STYLERL_NUM_FIELD

const Field &Lookup(const std::string &key) {
  static const std::unordered_map<std::string, const Field *> index = [] {
    std::unordered_map<std::string, const Field *> m;
    for (const auto &[k, f] : Fields()) m[k] = &f;
    return m;
  }();
  auto it = index.find(key);
  if (it == index.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it->second;
}

}  // namespace

const std::vector<std::string> &Config::Keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto &[name, f] : Fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void Config::Set(const std::string &key, const std::string &value) { Lookup(key).set(*this, value); }

std::string Config::Get(const std::string &key) const { return Lookup(key).get(*this); }

std::string Config::ToText() const {
  std::string out;
  for (const auto &[k, f] : Fields()) out += k + "=" + f.get(*this) + "\n";
  return out;
}

void Config::Validate() const {
  if (synth_skew) {
    SyntheticSpec s = synth;
    if (!s.skew) s.skew = PlantedSkew();
    s.Validate();
  } else {
    SyntheticSpec s = synth;
    s.skew.reset();
    s.Validate();
  }
  if (vocab_max < kNumSpecials + 1) throw ConfigError("vocab_max must be at least 7");
  if (vocab_min_freq < 1) throw ConfigError("vocab_min_freq must be >= 1");
  for (int v : {gen_embed, gen_hidden, cls_embed, cls_filters, cls_style_dim, cls_hidden, adv_embed, adv_hidden,
                lm_embed, lm_hidden}) {
    if (v < 1) throw ConfigError("model dimensions must be positive");
  }
  if (lm_epochs < 0 || eval_clf_epochs < 0) throw ConfigError("epoch counts must be >= 0");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
    throw ConfigError("heldout_fraction must be in (0, 1)");
  }
  if (dev_limit < 0) throw ConfigError("dev_limit must be >= 0");
  if (audit_min_count < 1) throw ConfigError("audit.min_count must be >= 1");
  if (!(audit_skew_threshold > 0.5 && audit_skew_threshold <= 1.0)) {
    throw ConfigError("audit.skew_threshold must be in (0.5, 1]");
  }
  train.Validate();
}

std::string Config::Id() const {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : ToText()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ApplyConfigText(Config &config, const std::string &text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    try {
      config.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
    } catch (const ConfigError &e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

Config LoadConfigFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  Config c;
  ApplyConfigText(c, ss.str());
  return c;
}

std::string ConfigEcho(const Config &config) {
  std::string out;
  std::istringstream in(config.ToText());
  std::string line;
  while (std::getline(in, line)) out += "config." + line + "\n";
  return out;
}

Config ConfigFromReport(const std::string &report) {
  Config c;
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("config.", 0) != 0) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("bad config echo line: " + line);
    c.Set(line.substr(7, eq - 7), line.substr(eq + 1));
  }
  return c;
}

void ApplyOverride(Config &config, const std::string &assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  config.Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

}  // namespace stylerl
