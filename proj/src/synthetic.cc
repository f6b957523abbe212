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

#include "stylerl/synthetic.h"

#include <cmath>
#include <random>
#include <set>

#include "stylerl/errors.h"

namespace stylerl {
namespace {

struct Draw {
  Sentence tokens;
  Sentence reference;
};

std::vector<double> RandomUnit(std::mt19937_64 &rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (double &x : v) {
    x = normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double &x : v) x /= norm;
  return v;
}

double Dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void ScaleTo(std::vector<double> &v, double norm) {
  const double n = std::sqrt(Dot(v, v));
  for (double &x : v) x *= norm / n;
}

}  // namespace

SyntheticSpec SyntheticSpec::Default() {
  SyntheticSpec spec;
  spec.templates = {
      "the {noun} was {pol} .",
      "the {noun} was {pol} {tail} .",
      "this {noun} is {pol} .",
      "i found the {noun} {pol} {tail} .",
      "our {noun} was really {pol} .",
      "the {noun} here is {pol} {tail} .",
  };
  // Style 0 is negative, style 1 positive.
  spec.strong[0] = {"awful", "terrible", "horrible", "disgusting", "dreadful"};
  spec.strong[1] = {"great", "excellent", "amazing", "wonderful", "fantastic"};
  spec.mild[0] = {"bad",  "poor", "bland", "cold",   "dirty",  "slow",  "rude",  "stale",
                  "greasy", "noisy", "dull", "soggy", "pricey", "messy", "weak"};
  spec.mild[1] = {"good",  "nice",  "friendly", "fresh", "tasty", "pleasant", "lovely", "decent",
                  "solid", "fine",  "warm",     "clean", "cozy",  "helpful",  "fair"};
  spec.nouns = {"food",  "service", "staff", "pizza", "room",   "coffee", "pasta", "menu",
                "waiter", "bread", "salad", "burger", "music", "decor",  "game",  "phone",
                "book",  "movie",   "camera", "bed",  "view",   "desk"};
  spec.tails = {"for the price", "on our visit", "this time", "as usual", "overall", "today"};
  return spec;
}

void SyntheticSpec::Validate() const {
  if (templates.empty()) throw ConfigError("synthetic: no templates");
  for (Style s = 0; s < 2; ++s) {
    if (strong[s].empty() || mild[s].empty()) {
      throw ConfigError("synthetic: empty polarity lexicon for style " + std::to_string(s));
    }
  }
  if (strong[0].size() != strong[1].size() || mild[0].size() != mild[1].size()) {
    throw ConfigError("synthetic: lexicon tiers must have equal sizes across styles");
  }
  std::set<std::string> seen;
  for (Style s = 0; s < 2; ++s) {
    for (const auto *tier : {&strong[s], &mild[s]}) {
      for (const std::string &w : *tier) {
        if (!seen.insert(w).second) {
          throw ConfigError("synthetic: lexicons are not disjoint ('" + w + "')");
        }
      }
    }
  }
  if (nouns.size() < 2) throw ConfigError("synthetic: need at least two nouns");
  if (tails.empty()) throw ConfigError("synthetic: no tails");
  if (strong_rate < 0 || strong_rate > 1) throw ConfigError("synthetic: strong_rate outside [0,1]");
  if (mild_noise < 0 || mild_noise >= 0.5) throw ConfigError("synthetic: mild_noise outside [0,0.5)");
  if (skew) {
    if (!(skew->probability >= 0.5 && skew->probability <= 1.0)) {
      throw ConfigError("synthetic: skew probability " + std::to_string(skew->probability) +
                        " outside [0.5, 1]");
    }
    if (!(skew->rate > 0 && skew->rate < 1)) throw ConfigError("synthetic: skew rate outside (0,1)");
    if (skew->style != 0 && skew->style != 1) throw ConfigError("synthetic: skew style not in {0,1}");
    bool found = false;
    for (const std::string &n : nouns) found = found || n == skew->token;
    if (!found) throw ConfigError("synthetic: skew token '" + skew->token + "' is not a noun");
  }
  if (train_per_style < 1 || dev_per_style < 1 || test_per_style < 1) {
    throw ConfigError("synthetic: split sizes must be positive");
  }
  if (embedding_dim < 4) throw ConfigError("synthetic: embedding_dim must be >= 4");
}

SyntheticData GenerateSynthetic(const SyntheticSpec &spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); };

  std::vector<std::string> other_nouns;
  for (const std::string &n : spec.nouns) {
    if (!spec.skew || n != spec.skew->token) other_nouns.push_back(n);
  }

  auto draw = [&](Style style) {
    std::string noun;
    if (spec.skew) {
      const PlantedSkew &k = *spec.skew;
      const double p = style == k.style ? k.rate : k.rate * (1.0 - k.probability) / k.probability;
      noun = unit(rng) < p ? k.token : other_nouns[pick(other_nouns.size())];
    } else {
      noun = spec.nouns[pick(spec.nouns.size())];
    }
    const bool strong = unit(rng) < spec.strong_rate;
    const auto &tier = strong ? spec.strong : spec.mild;
    Style lex_style = style;
    if (!strong && unit(rng) < spec.mild_noise) lex_style = 1 - style;
    const size_t word = pick(tier[lex_style].size());
    const std::string &tmpl = spec.templates[pick(spec.templates.size())];
    const std::string &tail = spec.tails[pick(spec.tails.size())];

    Draw d;
    for (const std::string &slot : Normalize(tmpl)) {
      if (slot == "{noun}") {
        d.tokens.push_back(noun);
        d.reference.push_back(noun);
      } else if (slot == "{pol}") {
        d.tokens.push_back(tier[lex_style][word]);
        d.reference.push_back(tier[1 - lex_style][word]);
      } else if (slot == "{tail}") {
        for (const std::string &t : Normalize(tail)) {
          d.tokens.push_back(t);
          d.reference.push_back(t);
        }
      } else {
        d.tokens.push_back(slot);
        d.reference.push_back(slot);
      }
    }
    return d;
  };

  SyntheticData out;
  StyledCorpus &c = out.corpus;
  StyleSplit refs;
  for (Style s = 0; s < 2; ++s) {
    for (int i = 0; i < spec.train_per_style; ++i) c.train[s].push_back(draw(s).tokens);
    for (int i = 0; i < spec.dev_per_style; ++i) c.dev[s].push_back(draw(s).tokens);
    for (int i = 0; i < spec.test_per_style; ++i) {
      Draw d = draw(s);
      c.test[s].push_back(std::move(d.tokens));
      refs[s].push_back(std::move(d.reference));
    }
  }
  c.refs = std::move(refs);

  // Embeddings: one base direction per style lexicon, synonyms jittered
  // around it, nouns orthogonal to both bases, everything else random.
  const int dim = spec.embedding_dim;
  SimModel &emb = out.embeddings = SimModel(dim);
  std::normal_distribution<double> jitter(0.0, spec.synonym_noise);
  std::array<std::vector<double>, 2> base = {RandomUnit(rng, dim), RandomUnit(rng, dim)};
  for (Style s = 0; s < 2; ++s) {
    for (const auto *tier : {&spec.strong[s], &spec.mild[s]}) {
      for (const std::string &w : *tier) {
        std::vector<double> v = base[s];
        for (double &x : v) x += jitter(rng);
        emb.SetUnit(w, std::move(v));
      }
    }
  }
  // Orthonormal basis of span(base[0], base[1]) for one Gram-Schmidt pass.
  std::vector<double> e0 = base[0];
  std::vector<double> e1 = base[1];
  const double proj = Dot(e1, e0);
  for (int i = 0; i < dim; ++i) e1[i] -= proj * e0[i];
  ScaleTo(e1, 1.0);
  for (const std::string &n : spec.nouns) {
    std::vector<double> v = RandomUnit(rng, dim);
    const double a = Dot(v, e0);
    const double b = Dot(v, e1);
    for (int i = 0; i < dim; ++i) v[i] -= a * e0[i] + b * e1[i];
    ScaleTo(v, spec.noun_norm);
    emb.SetUnit(n, std::move(v));
  }
  std::set<std::string> rest;
  for (const std::string &t : spec.templates) {
    for (const std::string &w : Normalize(t)) {
      if (w.front() != '{') rest.insert(w);
    }
  }
  for (const std::string &t : spec.tails) {
    for (const std::string &w : Normalize(t)) rest.insert(w);
  }
  for (const std::string &w : rest) {
    if (emb.Find(w) == nullptr) emb.SetUnit(w, RandomUnit(rng, dim));
  }
  for (const char ch : std::string("abcdefghijklmnopqrstuvwxyz0123456789<>/.,!?'-")) {
    const std::string u(1, ch);
    if (emb.Find(u) == nullptr) {
      std::vector<double> v = RandomUnit(rng, dim);
      for (double &x : v) x *= 0.5;
      emb.SetUnit(u, std::move(v));
    }
  }
  return out;
}

}  // namespace stylerl
