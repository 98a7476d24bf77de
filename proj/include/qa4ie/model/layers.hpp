#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qa4ie/ad/graph.hpp"
#include "qa4ie/util/rng.hpp"

namespace qa4ie::model {

using ad::Graph;
using ad::Parameter;
using ad::ParameterSet;
using ad::Tensor;
using ad::Var;

// Inverted dropout applied between layers while training.
struct Dropout {
  double rate = 0.0;
  bool training = false;
  Rng* rng = nullptr;

  Var operator()(Var x) const;
};

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);
Tensor uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng);

// Unidirectional LSTM, gate order (input, forget, cell, output). Rows are time steps.
class Lstm {
 public:
  struct State {
    Var h;
    Var c;
  };

  Lstm() = default;
  Lstm(ParameterSet& params, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng);

  std::size_t hidden() const { return hidden_; }

  // x W_in + b for every row at once: n x 4h.
  Var project(Graph& g, Var x) const;
  // One step from a projected input row.
  State step(Graph& g, Var projected_row, State prev) const;
  State zero_state(Graph& g) const;
  // Zero initial state; output row t is the state after consuming row t.
  Var run(Graph& g, Var x, bool reverse) const;

 private:
  Parameter* w_in_ = nullptr;
  Parameter* w_rec_ = nullptr;
  Parameter* bias_ = nullptr;
  std::size_t hidden_ = 0;
};

// Forward and backward passes concatenated per position: n x 2h.
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterSet& params, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng);

  Var forward(Graph& g, Var x) const;
  const Lstm& fw() const { return fw_; }
  const Lstm& bw() const { return bw_; }

 private:
  Lstm fw_;
  Lstm bw_;
};

// Character embeddings, `filters` convolutions of width `width`, max over
// time, then tanh. Words shorter than the width are padded with the pad char.
class CharCnn {
 public:
  CharCnn() = default;
  CharCnn(ParameterSet& params, std::size_t chars, std::size_t embed_dim, std::size_t filters, std::size_t width,
          Rng& rng);

  Var forward(Graph& g, const std::vector<std::vector<std::size_t>>& words) const;
  std::size_t width() const { return width_; }

 private:
  Parameter* table_ = nullptr;
  Parameter* filters_ = nullptr;
  Parameter* bias_ = nullptr;
  std::size_t embed_dim_ = 0;
  std::size_t width_ = 0;
};

// u = g * relu(x Wx + bx) + (1 - g) * (x P), g = sigmoid(x Wg + bg).
// P maps the 2d-wide input onto the d-wide carry path.
class Highway {
 public:
  Highway() = default;
  Highway(ParameterSet& params, std::size_t input, std::size_t output, Rng& rng);

  Var forward(Graph& g, Var x) const;

 private:
  Parameter* proj_ = nullptr;
  Parameter* gate_w_ = nullptr;
  Parameter* gate_b_ = nullptr;
  Parameter* trans_w_ = nullptr;
  Parameter* trans_b_ = nullptr;
};

// Context/query attention over U (n x 2d) and V (m x 2d) giving n x 8d.
//   S(t,j) = w . [u_t; v_j; u_t * v_j]
//   c2q_t  = sum_j softmax_j(S(t,.)) v_j
//   q2c    = sum_t softmax_t(max_j S(t,j)) u_t
//   h_t    = [u_t; c2q_t; u_t * c2q_t; u_t * q2c]
class AttentionFlow {
 public:
  struct Output {
    Var similarity;
    Var context_to_query;
    Var query_to_context;
    Var h;
  };

  AttentionFlow() = default;
  AttentionFlow(ParameterSet& params, std::size_t width, Rng& rng);

  Output forward(Graph& g, Var context, Var query) const;

 private:
  Parameter* w_ = nullptr;
  std::size_t width_ = 0;
};

// Self attention of the passage over itself followed by a BiLSTM over [h_t, c_t].
class SelfMatch {
 public:
  struct Output {
    Var weights;  // n x n, row t holds alpha^t
    Var context;  // n x 8d
    Var o;        // n x 2d
  };

  SelfMatch() = default;
  SelfMatch(ParameterSet& params, std::size_t input, std::size_t d, Rng& rng);

  Output forward(Graph& g, Var h, const Dropout& drop) const;

 private:
  Parameter* w_key_ = nullptr;
  Parameter* w_query_ = nullptr;
  Parameter* w_ = nullptr;
  BiLstm rnn_;
};

enum class StopReason { Eos, MaxLen };

struct DecodeResult {
  std::vector<std::size_t> answer_indices;
  std::vector<std::string> answer_tokens;
  std::vector<double> step_probs;
  std::vector<std::vector<double>> distributions;  // n + 1 slots, eos last
  double score_mul = 0.0;
  double score_avg = 0.0;
  StopReason stopped_by = StopReason::Eos;

  bool immediate_eos() const { return answer_indices.empty(); }
};

// Pointer network over the rows of O plus a learned eos slot at index n.
// The decoder state is advanced by the attention-weighted context, so the
// per-step distributions do not depend on which slots are chosen.
class PointerDecoder {
 public:
  // Incremental decoding state bound to one graph and memory.
  class Session {
   public:
    Session(const PointerDecoder& dec, Graph& g, Var memory);
    // Scores over n + 1 slots for the next step, advancing the state.
    Var next_scores();
    std::size_t slots() const { return n_ + 1; }

   private:
    const PointerDecoder& dec_;
    Graph& g_;
    Var memory_;
    Var keys_;
    Var w_;
    Var w_state_;
    Lstm::State state_;
    std::size_t n_;
  };

  PointerDecoder() = default;
  PointerDecoder(ParameterSet& params, std::size_t width, std::size_t d, Rng& rng);

  // -sum_t log beta^t(y_t) - log beta^{L+1}(eos). Optionally records each
  // step's distribution.
  Var loss(Graph& g, Var memory, std::span<const std::size_t> target,
           std::vector<std::vector<double>>* distributions = nullptr) const;

  // Greedy argmax (lowest index on ties) until eos or max_len tokens.
  DecodeResult greedy(Graph& g, Var memory, std::size_t max_len) const;

 private:
  Parameter* w_mem_ = nullptr;
  Parameter* w_state_ = nullptr;
  Parameter* w_ = nullptr;
  Parameter* eos_ = nullptr;
  Lstm cell_;
};

}  // namespace qa4ie::model
