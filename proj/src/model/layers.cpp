#include "qa4ie/model/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qa4ie::model {

Var Dropout::operator()(Var x) const {
  if (!training || rate == 0.0) return x;
  return ad::dropout(x, rate, training, *rng);
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  return uniform(rows, cols, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

Tensor uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

// ---- LSTM -------------------------------------------------------------

Lstm::Lstm(ParameterSet& params, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng)
    : hidden_(hidden) {
  w_in_ = &params.add(prefix + ".w_in", glorot_uniform(input, 4 * hidden, rng));
  w_rec_ = &params.add(prefix + ".w_rec", glorot_uniform(hidden, 4 * hidden, rng));
  Tensor b = Tensor::matrix(1, 4 * hidden);
  for (std::size_t k = hidden; k < 2 * hidden; ++k) b[k] = 1.0;  // forget gate
  bias_ = &params.add(prefix + ".bias", std::move(b));
}

Var Lstm::project(Graph& g, Var x) const {
  return ad::add(ad::matmul(x, g.parameter(*w_in_)), g.parameter(*bias_));
}

Lstm::State Lstm::zero_state(Graph& g) const {
  return {g.constant(Tensor::matrix(1, hidden_)), g.constant(Tensor::matrix(1, hidden_))};
}

Lstm::State Lstm::step(Graph& g, Var projected_row, State prev) const {
  const std::size_t h = hidden_;
  Var gates = ad::add(projected_row, ad::matmul(prev.h, g.parameter(*w_rec_)));
  Var i = ad::sigmoid(ad::slice_cols(gates, 0, h));
  Var f = ad::sigmoid(ad::slice_cols(gates, h, 2 * h));
  Var cand = ad::tanh(ad::slice_cols(gates, 2 * h, 3 * h));
  Var o = ad::sigmoid(ad::slice_cols(gates, 3 * h, 4 * h));
  Var c = ad::add(ad::mul(f, prev.c), ad::mul(i, cand));
  return {ad::mul(o, ad::tanh(c)), c};
}

Var Lstm::run(Graph& g, Var x, bool reverse) const {
  const std::size_t n = x.rows();
  Var xp = project(g, x);
  std::vector<Var> out(n);
  State s = zero_state(g);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    s = step(g, ad::slice_rows(xp, t, t + 1), s);
    out[t] = s.h;
  }
  return ad::concat_rows(out);
}

BiLstm::BiLstm(ParameterSet& params, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng)
    : fw_(params, prefix + ".fw", input, hidden, rng), bw_(params, prefix + ".bw", input, hidden, rng) {}

Var BiLstm::forward(Graph& g, Var x) const {
  const Var parts[] = {fw_.run(g, x, false), bw_.run(g, x, true)};
  return ad::concat_cols(parts);
}

// ---- char CNN ---------------------------------------------------------

CharCnn::CharCnn(ParameterSet& params, std::size_t chars, std::size_t embed_dim, std::size_t filters,
                 std::size_t width, Rng& rng)
    : embed_dim_(embed_dim), width_(width) {
  table_ = &params.add("char.embed", uniform(chars, embed_dim, 0.1, rng));
  filters_ = &params.add("char.filters", glorot_uniform(width * embed_dim, filters, rng));
  bias_ = &params.add("char.bias", Tensor::matrix(1, filters));
}

Var CharCnn::forward(Graph& g, const std::vector<std::vector<std::size_t>>& words) const {
  if (words.empty()) throw std::invalid_argument("char cnn: no words");
  std::size_t len = width_;
  for (const auto& w : words) len = std::max(len, w.size());
  const std::size_t windows = len - width_ + 1;
  std::vector<std::size_t> ids;
  ids.reserve(words.size() * windows * width_);
  // Each word is padded to the filter width on its own; shorter words repeat
  // their last window so the pooled feature ignores the rest of the batch.
  for (const auto& w : words) {
    const std::size_t own = std::max(w.size(), width_) - width_ + 1;
    for (std::size_t k = 0; k < windows; ++k) {
      const std::size_t start = std::min(k, own - 1);
      for (std::size_t o = 0; o < width_; ++o) ids.push_back(start + o < w.size() ? w[start + o] : 0);
    }
  }
  Var chars = ad::gather_rows(g.parameter(*table_), ids);
  Var unfolded = ad::reshape(chars, words.size() * windows, width_ * embed_dim_);
  Var conv = ad::add(ad::matmul(unfolded, g.parameter(*filters_)), g.parameter(*bias_));
  return ad::tanh(ad::max_pool_rows(conv, windows));
}

// ---- highway ----------------------------------------------------------

Highway::Highway(ParameterSet& params, std::size_t input, std::size_t output, Rng& rng) {
  proj_ = &params.add("highway.proj", glorot_uniform(input, output, rng));
  gate_w_ = &params.add("highway.gate_w", glorot_uniform(input, output, rng));
  gate_b_ = &params.add("highway.gate_b", Tensor::matrix(1, output));
  trans_w_ = &params.add("highway.trans_w", glorot_uniform(input, output, rng));
  trans_b_ = &params.add("highway.trans_b", Tensor::matrix(1, output));
}

Var Highway::forward(Graph& g, Var x) const {
  const std::size_t in = proj_->value.rows();
  if (x.cols() != in) {
    throw ad::ShapeError("highway: input width " + std::to_string(x.cols()) + ", expected " + std::to_string(in));
  }
  Var gate = ad::sigmoid(ad::add(ad::matmul(x, g.parameter(*gate_w_)), g.parameter(*gate_b_)));
  Var transform = ad::relu(ad::add(ad::matmul(x, g.parameter(*trans_w_)), g.parameter(*trans_b_)));
  Var carry = ad::matmul(x, g.parameter(*proj_));
  return ad::add(ad::mul(gate, transform), ad::mul(ad::affine(gate, -1.0, 1.0), carry));
}

// ---- attention flow ---------------------------------------------------

AttentionFlow::AttentionFlow(ParameterSet& params, std::size_t width, Rng& rng) : width_(width) {
  w_ = &params.add("attflow.w", glorot_uniform(1, 3 * width, rng));
}

AttentionFlow::Output AttentionFlow::forward(Graph& g, Var context, Var query) const {
  if (context.cols() != width_ || query.cols() != width_) {
    throw ad::ShapeError("attention flow: context " + ad::to_string(context.shape()) + ", query " +
                         ad::to_string(query.shape()) + ", expected width " + std::to_string(width_));
  }
  Var w = g.parameter(*w_);
  Var w_ctx = ad::slice_cols(w, 0, width_);
  Var w_qry = ad::slice_cols(w, width_, 2 * width_);
  Var w_mix = ad::slice_cols(w, 2 * width_, 3 * width_);
  Var ctx_term = ad::matmul(context, ad::transpose(w_ctx));                 // n x 1
  Var qry_term = ad::transpose(ad::matmul(query, ad::transpose(w_qry)));    // 1 x m
  Var mix_term = ad::matmul(ad::mul(context, w_mix), ad::transpose(query));  // n x m
  Output out;
  out.similarity = ad::add(ad::add(mix_term, ctx_term), qry_term);
  out.context_to_query = ad::matmul(ad::softmax(out.similarity), query);
  Var q2c_weights = ad::softmax(ad::transpose(ad::max_cols(out.similarity)));  // 1 x n
  out.query_to_context = ad::matmul(q2c_weights, context);                      // 1 x 2d
  const Var parts[] = {context, out.context_to_query, ad::mul(context, out.context_to_query),
                       ad::mul(context, out.query_to_context)};
  out.h = ad::concat_cols(parts);
  return out;
}

// ---- self matching ----------------------------------------------------

SelfMatch::SelfMatch(ParameterSet& params, std::size_t input, std::size_t d, Rng& rng)
    : rnn_(params, "selfmatch.rnn", 2 * input, d, rng) {
  w_key_ = &params.add("selfmatch.w_key", glorot_uniform(input, d, rng));
  w_query_ = &params.add("selfmatch.w_query", glorot_uniform(input, d, rng));
  w_ = &params.add("selfmatch.w", glorot_uniform(1, d, rng));
}

SelfMatch::Output SelfMatch::forward(Graph& g, Var h, const Dropout& drop) const {
  Var keys = ad::matmul(h, g.parameter(*w_key_));
  Var queries = ad::matmul(h, g.parameter(*w_query_));
  Output out;
  out.weights = ad::softmax(ad::additive_attention(keys, queries, g.parameter(*w_)));
  out.context = ad::matmul(out.weights, h);
  const Var parts[] = {h, out.context};
  out.o = rnn_.forward(g, drop(ad::concat_cols(parts)));
  return out;
}

// ---- pointer decoder --------------------------------------------------

PointerDecoder::PointerDecoder(ParameterSet& params, std::size_t width, std::size_t d, Rng& rng)
    : cell_(params, "decoder.cell", width, width, rng) {
  w_mem_ = &params.add("decoder.w_mem", glorot_uniform(width, d, rng));
  w_state_ = &params.add("decoder.w_state", glorot_uniform(width, d, rng));
  w_ = &params.add("decoder.w", glorot_uniform(1, d, rng));
  eos_ = &params.add("decoder.eos", uniform(1, width, 0.1, rng));
}

PointerDecoder::Session::Session(const PointerDecoder& dec, Graph& g, Var memory)
    : dec_(dec), g_(g), memory_(memory), n_(memory.rows()) {
  const Var rows[] = {memory, g.parameter(*dec.eos_)};
  keys_ = ad::matmul(ad::concat_rows(rows), g.parameter(*dec.w_mem_));
  w_ = g.parameter(*dec.w_);
  w_state_ = g.parameter(*dec.w_state_);
  // p_0 is the last memory row; the cell starts empty.
  state_ = {ad::slice_rows(memory, n_ - 1, n_), g.constant(Tensor::matrix(1, dec.cell_.hidden()))};
}

Var PointerDecoder::Session::next_scores() {
  Var scores = ad::additive_attention(keys_, ad::matmul(state_.h, w_state_), w_);
  Var beta = ad::softmax(scores);
  Var context = ad::matmul(ad::slice_cols(beta, 0, n_), memory_);
  state_ = dec_.cell_.step(g_, dec_.cell_.project(g_, context), state_);
  return scores;
}

Var PointerDecoder::loss(Graph& g, Var memory, std::span<const std::size_t> target,
                         std::vector<std::vector<double>>* distributions) const {
  const std::size_t n = memory.rows();
  Session session(*this, g, memory);
  std::vector<Var> terms;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const std::size_t slot = t < target.size() ? target[t] : n;
    if (slot > n || (t < target.size() && slot == n)) {
      throw std::out_of_range("pointer decoder: target index " + std::to_string(slot) + " outside [0, " +
                              std::to_string(n) + ")");
    }
    Var log_probs = ad::log_softmax(session.next_scores());
    if (distributions) {
      std::vector<double> p;
      for (double v : log_probs.value().data()) p.push_back(std::exp(v));
      distributions->push_back(std::move(p));
    }
    terms.push_back(ad::pick(log_probs, 0, slot));
  }
  return ad::affine(ad::sum(ad::concat_cols(terms)), -1.0, 0.0);
}

DecodeResult PointerDecoder::greedy(Graph& g, Var memory, std::size_t max_len) const {
  const std::size_t n = memory.rows();
  Session session(*this, g, memory);
  DecodeResult out;
  out.stopped_by = StopReason::MaxLen;
  double eos_first = 0.0;
  for (std::size_t t = 0; t < max_len; ++t) {
    std::vector<double> beta = ad::softmax(session.next_scores().value().data());
    const std::size_t pick = ad::argmax(beta);
    if (t == 0) eos_first = beta[n];
    out.distributions.push_back(beta);
    if (pick == n) {
      out.stopped_by = StopReason::Eos;
      break;
    }
    out.answer_indices.push_back(pick);
    out.step_probs.push_back(beta[pick]);
  }
  if (out.step_probs.empty()) {
    out.score_mul = out.score_avg = eos_first;
  } else {
    double prod = 1.0, total = 0.0;
    for (double p : out.step_probs) {
      prod *= p;
      total += p;
    }
    out.score_mul = prod;
    out.score_avg = total / static_cast<double>(out.step_probs.size());
  }
  return out;
}

}  // namespace qa4ie::model
