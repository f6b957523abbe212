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

#ifndef STYLERL_LAYERS_H_
#define STYLERL_LAYERS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stylerl/autodiff.h"
#include "stylerl/vocab.h"

namespace stylerl {

inline constexpr double kInitScale = 0.08;

// Fills with uniform(-scale, scale) draws.
Tensor UniformTensor(Shape shape, std::mt19937_64 &rng, double scale = kInitScale);

// Gated recurrent unit with gate order (reset, update, candidate).
struct GruCell {
  GruCell() = default;
  GruCell(const std::string &prefix, int input_dim, int hidden, std::mt19937_64 &rng);

  int hidden() const { return wh.value.dim(0); }
  // Input projection x * wx + bx for any number of rows.
  Var Project(Graph &g, Var x);
  // One step given the projected input rows and previous state.
  Var Step(Graph &g, Var projected, Var h);
  std::vector<Parameter *> Params() { return {&wx, &wh, &bx, &bh}; }

  Parameter wx, wh, bx, bh;
};

// Long short-term memory cell with gate order (input, forget, cell, output).
struct LstmCell {
  LstmCell() = default;
  LstmCell(const std::string &prefix, int input_dim, int hidden, std::mt19937_64 &rng);

  int hidden() const { return wh.value.dim(0); }
  Var Project(Graph &g, Var x);
  // Updates h and c in place.
  void Step(Graph &g, Var projected, Var &h, Var &c);
  std::vector<Parameter *> Params() { return {&wx, &wh, &b}; }

  Parameter wx, wh, b;
};

// h + mask * (next - h), row-wise. Rows with mask 0 keep their state.
Var MaskedUpdate(Var h, Var next, const std::vector<double> &mask);

// Time-major id matrix for a batch of sequences, right-padded with PAD.
// Returns ids of length steps * batch.
std::vector<int> TimeMajor(const std::vector<TokenIds> &seqs, int steps);

// Index of the largest entry of row r, skipping ids for which banned(id).
int ArgmaxRow(const Tensor &t, int r, const std::vector<bool> &banned);

// Time-major [T,B,d] embeddings of token sequences, right-padded with PAD to
// at least min_steps. Empty sequences raise ContractError.
Var EmbedSequences(Var table, const std::vector<TokenIds> &seqs, int min_steps,
                   std::vector<int> *lengths);

// Soft counterpart: position t of row b embeds as probs[t][b] * table for
// t < lengths[b] and as the PAD row afterwards. A zero length is read as a
// single UNK token. Rows inside the length must sum to 1 within 1e-6.
Var EmbedDistributions(Var table, const std::vector<Var> &probs,
                       std::vector<int> &lengths, int min_steps);

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Copies values of params into / out of a named list. Import throws
// FormatError on a missing name or a shape mismatch.
void ExportParams(const std::vector<Parameter *> &params, NamedTensors &out);
void ImportParams(const std::vector<Parameter *> &params, const NamedTensors &in);

}  // namespace stylerl

#endif  // STYLERL_LAYERS_H_
