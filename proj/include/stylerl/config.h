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

#ifndef STYLERL_CONFIG_H_
#define STYLERL_CONFIG_H_

#include <string>
#include <vector>

#include "stylerl/synthetic.h"
#include "stylerl/training.h"

namespace stylerl {

inline constexpr const char *kConfigEnv = "STYLERL_CONFIG";

// Everything a command needs, with the defaults filled in.
struct Config {
  // Paths.
  std::string corpus_dir = "data";
  std::string embeddings = "data/embeddings.txt";
  std::string checkpoint_dir = "checkpoints";
  std::string report_dir = "reports";

  SyntheticSpec synth = SyntheticSpec::Default();
  bool synth_skew = false;

  // Vocabulary and model sizes.
  int vocab_max = 10000;
  int vocab_min_freq = 1;
  int gen_embed = 64;
  int gen_hidden = 128;
  int cls_embed = 64;
  int cls_filters = 32;
  int cls_style_dim = 8;
  int cls_hidden = 32;
  int adv_embed = 32;
  int adv_hidden = 64;
  int lm_embed = 32;
  int lm_hidden = 64;
  int lm_epochs = 3;
  double heldout_fraction = 0.1;
  int eval_clf_epochs = 5;
  // Dev sentences per style used at each dev evaluation; 0 means all.
  int dev_limit = 0;

  TrainConfig train;

  int audit_min_count = 5;
  double audit_skew_threshold = 0.9;

  // Key order of ToText().
  static const std::vector<std::string> &Keys();

  // Sets one key from its text form; ConfigError on an unknown key or a bad
  // value.
  void Set(const std::string &key, const std::string &value);
  std::string Get(const std::string &key) const;
  // "key=value" per line, every key, in Keys() order.
  std::string ToText() const;
  // Checks ranges and cross-field constraints.
  void Validate() const;
  // FNV-1a of ToText(), hex.
  std::string Id() const;

  bool operator==(const Config &other) const { return ToText() == other.ToText(); }
};

// Applies "key = value" lines; '#' starts a comment. Unknown keys raise
// ConfigError with the line number.
void ApplyConfigText(Config &config, const std::string &text);
Config LoadConfigFile(const std::string &path);
// The config as echoed into a report: "config.<key>=<value>" lines.
std::string ConfigEcho(const Config &config);
// Rebuilds a config from the echo lines of a report, ignoring other lines.
Config ConfigFromReport(const std::string &report);

// Applies one "key=value" override.
void ApplyOverride(Config &config, const std::string &assignment);

}  // namespace stylerl

#endif  // STYLERL_CONFIG_H_
