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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stylerl/classifier.h"
#include "stylerl/discriminator.h"
#include "stylerl/errors.h"
#include "stylerl/generator.h"
#include "stylerl/gradcheck.h"
#include "stylerl/lm.h"
#include "stylerl/optim.h"

namespace stylerl {
namespace {

// Four regular tokens on top of the reserved ids.
constexpr int kToyVocab = kNumSpecials + 4;

std::vector<TokenIds> RandomSentences(int n, int vocab, int max_len, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(kNumSpecials, vocab - 1);
  std::uniform_int_distribution<int> len(1, max_len);
  std::vector<TokenIds> out(n);
  for (auto &s : out) {
    s.resize(len(rng));
    for (int &t : s) t = tok(rng);
  }
  return out;
}

void Randomize(Parameter &p, uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  p.value = UniformTensor(p.value.shape(), rng, scale);
}

void ZeroAll(const std::vector<Parameter *> &ps) {
  for (Parameter *p : ps) p->ZeroGrad();
}

TokenIds WithEos(TokenIds x) {
  x.push_back(kEos);
  return x;
}

TEST(GeneratorTest, TeacherForcedNllGradient) {
  Generator gen({kToyVocab, 5, 6}, 3);
  Randomize(gen.out_w, 4);
  const std::vector<TokenIds> xs = {{6, 7, 8}, {9}};
  const std::vector<TokenIds> ys = {{7, kEos}, {6, 9, 8, kEos}};
  const std::vector<int> styles = {0, 1};
  GradCheckReport r = GradCheckParams(
      [&](Graph &g) {
        TeacherForced tf = gen.Score(g, xs, styles, ys);
        return ops::Scale(gen.WeightedLogLikelihood(g, tf, {0.5, 0.25}), -1.0);
      },
      gen.Params());
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  ZeroAll(gen.Params());
}

TEST(GeneratorTest, ScoreMatchesStepLogProbsUnderBatching) {
  Generator gen({kToyVocab, 5, 6}, 3);
  Randomize(gen.out_w, 5);
  const std::vector<TokenIds> xs = {{6, 7, 8, 9, 6}, {9}};
  const std::vector<TokenIds> ys = {{7, kEos}, {6, 9, 8, kEos}};
  Graph g(false);
  TeacherForced tf = gen.Score(g, xs, {1, 0}, ys);
  for (int b = 0; b < 2; ++b) {
    std::vector<double> solo = gen.StepLogProbs(xs[b], b == 0 ? 1 : 0, ys[b]);
    for (size_t t = 0; t < ys[b].size(); ++t) {
      EXPECT_NEAR(tf.log_probs.value().at(static_cast<int>(t) * 2 + b, ys[b][t]), solo[t], 1e-12);
    }
  }
}

TEST(GeneratorTest, GreedyNeverEmitsBannedTokens) {
  Generator gen({kToyVocab, 5, 6}, 11);
  // Push the banned ids far above everything else.
  for (int r = 0; r < gen.out_b.value.rows(); ++r) {
    for (int id : {kPad, kBos, kStyle0, kStyle1}) gen.out_b.value.at(r, id) = 50.0;
  }
  const auto xs = RandomSentences(20, kToyVocab, 6, 12);
  std::vector<int> styles(xs.size(), 1), lens;
  for (const auto &x : xs) lens.push_back(DefaultMaxLen(x));
  auto outs = gen.Greedy(xs, styles, lens);
  ASSERT_EQ(outs.size(), xs.size());
  for (size_t b = 0; b < outs.size(); ++b) {
    EXPECT_LE(static_cast<int>(outs[b].size()), lens[b]);
    for (int id : outs[b]) {
      EXPECT_NE(id, kPad);
      EXPECT_NE(id, kBos);
      EXPECT_NE(id, kStyle0);
      EXPECT_NE(id, kStyle1);
    }
  }
}

TEST(GeneratorTest, DeterministicForSeed) {
  Generator a({kToyVocab, 5, 6}, 21), b({kToyVocab, 5, 6}, 21), c({kToyVocab, 5, 6}, 22);
  EXPECT_EQ(a.embed.value, b.embed.value);
  EXPECT_NE(a.embed.value, c.embed.value);
  const auto xs = RandomSentences(8, kToyVocab, 5, 23);
  std::vector<int> styles(8, 0), lens(8, 6);
  EXPECT_EQ(a.Greedy(xs, styles, lens), b.Greedy(xs, styles, lens));
}

TEST(GeneratorTest, RejectsBadInputs) {
  Generator gen({kToyVocab, 5, 6}, 3);
  Graph g;
  EXPECT_THROW(gen.Score(g, {{6}}, {0}, {{7}}), ContractError);         // no EOS
  EXPECT_THROW(gen.Score(g, {{6}}, {2}, {{kEos}}), ContractError);      // style
  EXPECT_THROW(gen.Score(g, {{}}, {0}, {{kEos}}), ContractError);       // empty x
  EXPECT_THROW(gen.Score(g, {{kToyVocab}}, {0}, {{kEos}}), ContractError);
}

TEST(GeneratorTest, OverfitsCopyTask) {
  Generator gen({kToyVocab, 8, 24}, 5);
  const std::vector<TokenIds> xs = {{6, 7}, {8, 9, 6}, {9, 8}, {7, 7, 6}};
  std::vector<TokenIds> ys;
  for (const auto &x : xs) ys.push_back(WithEos(x));
  const std::vector<int> styles = {0, 1, 0, 1};
  Adam opt(gen.Params(), {.lr = 0.02});
  double loss = 0.0;
  for (int step = 0; step < 300; ++step) {
    Graph g;
    TeacherForced tf = gen.Score(g, xs, styles, ys);
    std::vector<double> w;
    int tokens = 0;
    for (const auto &y : ys) tokens += static_cast<int>(y.size());
    w.assign(xs.size(), -1.0 / tokens);
    Var l = gen.WeightedLogLikelihood(g, tf, w);
    loss = l.value().item();
    g.Backward(l);
    opt.Step();
  }
  EXPECT_LE(loss, 0.1);
  std::vector<int> lens;
  for (const auto &x : xs) lens.push_back(DefaultMaxLen(x));
  auto outs = gen.Greedy(xs, styles, lens);
  for (size_t b = 0; b < xs.size(); ++b) EXPECT_EQ(outs[b], ys[b]);
}

TEST(GeneratorTest, UnrollProbsAreDistributions) {
  Generator gen({kToyVocab, 5, 6}, 3);
  Graph g;
  Rollout r = gen.Unroll(g, {{6, 7}, {8}}, {0, 1}, {4, 3}, true);
  ASSERT_EQ(r.probs.size(), r.log_probs.size());
  for (const Var &p : r.probs) {
    for (int b = 0; b < 2; ++b) {
      double s = 0.0;
      for (int c = 0; c < kToyVocab; ++c) {
        s += p.value().at(b, c);
        EXPECT_NEAR(std::exp(r.log_probs[0].value().at(b, c)) >= 0.0, true, 0);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  EXPECT_LE(static_cast<int>(r.tokens[0].size()), 4);
  EXPECT_LE(static_cast<int>(r.tokens[1].size()), 3);
}

ClassifierConfig ToyClassifier() {
  ClassifierConfig c;
  c.vocab_size = kToyVocab;
  c.embed_dim = 4;
  c.filters = 3;
  c.widths = {2, 3};
  c.style_dim = 2;
  return c;
}

TEST(ClassifierTest, ZeroHeadGivesHalf) {
  StyleClassifier cls(ToyClassifier(), 1);
  auto xs = RandomSentences(5, kToyVocab, 6, 2);
  for (double p : cls.Probs(xs, {0, 1, 0, 1, 1})) EXPECT_EQ(p, 0.5);
}

TEST(ClassifierTest, LossGradient) {
  StyleClassifier cls(ToyClassifier(), 1);
  Randomize(cls.head_w, 3);
  const auto xs = RandomSentences(4, kToyVocab, 5, 4);
  const std::vector<int> styles = {0, 1, 1, 0};
  GradCheckReport r = GradCheckParams(
      [&](Graph &g) { return ops::Scale(ops::Mean(ops::LogSigmoid(cls.Logits(g, xs, styles))), -1.0); },
      cls.Params());
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  ZeroAll(cls.Params());
}

TEST(ClassifierTest, SoftLossGradientThroughDistributions) {
  StyleClassifier cls(ToyClassifier(), 1);
  Randomize(cls.head_w, 3);
  std::mt19937_64 rng(5);
  const int steps = 3, batch = 2;
  Tensor logits = UniformTensor({steps * batch, kToyVocab}, rng, 1.0);
  GradCheckReport r = GradCheck(
      [&](Graph &g, Var x) {
        std::vector<Var> probs;
        for (int t = 0; t < steps; ++t) probs.push_back(ops::Softmax(ops::SliceRows(x, t * batch, (t + 1) * batch)));
        return ops::Scale(ops::Mean(ops::LogSigmoid(cls.LogitsSoft(g, probs, {3, 2}, {1, 0}))), -1.0);
      },
      logits);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  ZeroAll(cls.Params());
}

std::vector<Tensor> OneHot(const std::vector<TokenIds> &xs, int vocab, int steps) {
  std::vector<Tensor> out;
  for (int t = 0; t < steps; ++t) {
    Tensor p({static_cast<int>(xs.size()), vocab});
    for (size_t b = 0; b < xs.size(); ++b) {
      p.at(static_cast<int>(b), t < static_cast<int>(xs[b].size()) ? xs[b][t] : kPad) = 1.0;
    }
    out.push_back(p);
  }
  return out;
}

TEST(SoftDiscreteTest, OneHotMatchesDiscreteOn100Fixtures) {
  for (int trial = 0; trial < 100; ++trial) {
    StyleClassifier cls(ToyClassifier(), 100 + trial);
    NaturalnessDiscriminator adv({kToyVocab, 4, 5}, 200 + trial);
    Randomize(cls.head_w, 300 + trial);
    Randomize(adv.head_w, 400 + trial);
    const auto xs = RandomSentences(3, kToyVocab, 7, 500 + trial);
    std::vector<int> lengths, styles = {trial % 2, 1 - trial % 2, 0};
    int steps = 0;
    for (const auto &x : xs) {
      lengths.push_back(static_cast<int>(x.size()));
      steps = std::max(steps, lengths.back());
    }
    Graph g(false);
    std::vector<Var> probs;
    for (const Tensor &t : OneHot(xs, kToyVocab, steps)) probs.push_back(g.Constant(t));
    const Tensor hard = cls.Logits(g, xs, styles).value();
    const Tensor soft = cls.LogitsSoft(g, probs, lengths, styles).value();
    const Tensor ahard = adv.Logits(g, xs).value();
    const Tensor asoft = adv.LogitsSoft(g, probs, lengths).value();
    for (int b = 0; b < 3; ++b) {
      EXPECT_NEAR(hard[b], soft[b], 1e-9);
      EXPECT_NEAR(ahard[b], asoft[b], 1e-9);
    }
  }
}

TEST(SoftDiscreteTest, UnnormalizedRowIsRejected) {
  StyleClassifier cls(ToyClassifier(), 1);
  Graph g(false);
  Tensor p({1, kToyVocab});
  p.at(0, 7) = 0.9;
  std::vector<Var> probs = {g.Constant(p)};
  EXPECT_THROW(cls.LogitsSoft(g, probs, {1}, {0}), Error);
}

TEST(ClassifierTest, LearnsSeparableStyles) {
  StyleClassifier cls(ToyClassifier(), 7);
  // Style 1 sentences contain token 9, style 0 sentences never do.
  std::vector<TokenIds> xs;
  std::vector<int> labels;
  auto base = RandomSentences(40, kToyVocab - 1, 5, 8);
  for (size_t i = 0; i < base.size(); ++i) {
    TokenIds x = base[i];
    if (i % 2) x.insert(x.begin() + static_cast<long>(x.size() / 2), 9);
    xs.push_back(x);
    labels.push_back(static_cast<int>(i % 2));
  }
  // The classifier scores f(x, s) = P(x has style s); train on both the
  // true and the wrong style.
  Adam opt(cls.Params(), {.lr = 0.01});
  for (int step = 0; step < 200; ++step) {
    Graph g;
    std::vector<int> wrong;
    for (int l : labels) wrong.push_back(1 - l);
    Var pos = ops::Mean(ops::LogSigmoid(cls.Logits(g, xs, labels)));
    Var neg = ops::Mean(ops::LogSigmoid(ops::Scale(cls.Logits(g, xs, wrong), -1.0)));
    g.Backward(ops::Scale(ops::Add(pos, neg), -1.0));
    opt.Step();
  }
  int correct = 0;
  auto p = cls.Probs(xs, labels);
  for (double v : p) correct += v > 0.5;
  EXPECT_EQ(correct, static_cast<int>(xs.size()));
}

TEST(ClassifierTest, BatchInvariant) {
  StyleClassifier cls(ToyClassifier(), 1);
  Randomize(cls.head_w, 2);
  const auto xs = RandomSentences(6, kToyVocab, 8, 3);
  const std::vector<int> styles = {0, 1, 0, 1, 1, 0};
  auto batched = cls.Probs(xs, styles);
  for (size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(cls.Prob(xs[i], styles[i]), batched[i], 1e-12);
}

TEST(DiscriminatorTest, ZeroHeadAndBatchInvariance) {
  NaturalnessDiscriminator adv({kToyVocab, 4, 5}, 1);
  const auto xs = RandomSentences(6, kToyVocab, 8, 3);
  for (double p : adv.Probs(xs)) EXPECT_EQ(p, 0.5);
  Randomize(adv.head_w, 2);
  auto batched = adv.Probs(xs);
  for (size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(adv.Prob(xs[i]), batched[i], 1e-12);
}

TEST(DiscriminatorTest, LossGradient) {
  NaturalnessDiscriminator adv({kToyVocab, 4, 5}, 1);
  Randomize(adv.head_w, 3);
  const auto real = RandomSentences(3, kToyVocab, 5, 4);
  const auto fake = RandomSentences(3, kToyVocab, 5, 5);
  GradCheckReport r = GradCheckParams(
      [&](Graph &g) {
        Var a = ops::Mean(ops::LogSigmoid(adv.Logits(g, real)));
        Var b = ops::Mean(ops::LogSigmoid(ops::Scale(adv.Logits(g, fake), -1.0)));
        return ops::Scale(ops::Add(a, b), -1.0);
      },
      adv.Params());
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  ZeroAll(adv.Params());
}

TEST(LMTest, UntrainedModelIsUniform) {
  NeuralLM lm({50, 4, 6}, 1);
  const auto xs = RandomSentences(5, 50, 9, 2);
  for (double p : lm.Perplexities(xs)) EXPECT_NEAR(p, 50.0, 1e-9);
  EXPECT_NEAR(lm.CorpusPerplexity(xs), 50.0, 1e-9);
  EXPECT_THROW(lm.Perplexity({}), ContractError);
}

TEST(LMTest, LossGradient) {
  NeuralLM lm({kToyVocab, 4, 5}, 1);
  Randomize(lm.out_w, 2);
  const auto xs = RandomSentences(3, kToyVocab, 5, 3);
  GradCheckReport r = GradCheckParams([&](Graph &g) { return lm.Loss(g, xs); }, lm.Params());
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  ZeroAll(lm.Params());
}

TEST(LMTest, NllConsistentAcrossViews) {
  NeuralLM lm({kToyVocab, 4, 5}, 1);
  Randomize(lm.out_w, 2);
  const auto xs = RandomSentences(7, kToyVocab, 6, 3);
  auto nll = lm.SentenceNll(xs);
  double total = 0.0;
  int tokens = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(nll[i].second, static_cast<int>(xs[i].size()) + 1);
    EXPECT_NEAR(lm.Perplexity(xs[i]), std::exp(nll[i].first / nll[i].second), 1e-9);
    total += nll[i].first;
    tokens += nll[i].second;
  }
  EXPECT_NEAR(lm.CorpusPerplexity(xs), std::exp(total / tokens), 1e-9);
  Graph g(false);
  EXPECT_NEAR(lm.Loss(g, xs).value().item(), total / tokens, 1e-12);
}

TEST(LMTest, FitLowersPerplexityAndTagsFingerprint) {
  NeuralLM lm({kToyVocab, 8, 16}, 1);
  // A rigid pattern: 6 7 8 9 repeated.
  std::vector<TokenIds> xs(64, TokenIds{6, 7, 8, 9});
  FitLM(lm, xs, {.epochs = 30, .batch_size = 16, .lr = 0.01, .seed = 2}, "train");
  EXPECT_LT(lm.CorpusPerplexity(xs), 1.5);
  EXPECT_EQ(lm.fingerprint(), CorpusFingerprint("train", xs));
  EXPECT_NE(CorpusFingerprint("train", xs), CorpusFingerprint("heldout", xs));
}

TEST(OptimTest, ClipsAndRejectsNonFinite) {
  Parameter p("p", Tensor({1, 2}));
  p.grad = Tensor({1, 2}, std::vector<double>{30.0, 40.0});
  Adam opt({&p}, {.lr = 0.1, .clip_norm = 5.0});
  EXPECT_NEAR(opt.Step(), 50.0, 1e-12);
  // First Adam step moves every coordinate by lr regardless of scale.
  EXPECT_NEAR(p.value[0], -0.1, 1e-6);
  EXPECT_EQ(p.grad[0], 0.0);
  p.grad[0] = std::nan("");
  EXPECT_THROW(opt.Step(), CheckError);
}

}  // namespace
}  // namespace stylerl
