#include "qa4ie/model/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qa4ie::model {

QaModel::QaModel(ModelConfig config, Vocabulary vocab) : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  // Fixed creation order from one seeded stream: same config and vocabulary,
  // same initial parameters.
  Rng rng(config_.seed);
  const std::size_t d = config_.d;
  word_table_ = &params_.add("word.embed", uniform(vocab_.word_count(), d, 0.1, rng));
  char_cnn_ = CharCnn(params_, vocab_.char_count(), config_.char_embed_dim, config_.char_filters, config_.char_width,
                      rng);
  highway_ = Highway(params_, 2 * d, d, rng);
  context_rnn_ = BiLstm(params_, "context.rnn", d, d, rng);
  query_rnn_ = BiLstm(params_, "query.rnn", d, d, rng);
  attention_ = AttentionFlow(params_, 2 * d, rng);
  self_match_ = SelfMatch(params_, 8 * d, d, rng);
  decoder_ = PointerDecoder(params_, 2 * d, d, rng);
}

Var QaModel::embed(Graph& g, const corpus::Tokens& tokens, const Dropout& drop) const {
  if (tokens.empty()) throw std::invalid_argument("embed: empty token list");
  const auto ids = vocab_.word_ids(tokens);
  std::vector<std::vector<std::size_t>> chars;
  chars.reserve(tokens.size());
  for (const auto& t : tokens) chars.push_back(vocab_.char_ids(t));
  const Var parts[] = {ad::gather_rows(g.parameter(*word_table_), ids), char_cnn_.forward(g, chars)};
  return drop(ad::concat_cols(parts));
}

Var QaModel::encode_context(Graph& g, const corpus::Tokens& doc, const Dropout& drop) const {
  if (doc.size() > config_.max_doc_len) throw std::invalid_argument("encode_context: document exceeds max_doc_len");
  return context_rnn_.forward(g, drop(highway_.forward(g, embed(g, doc, drop))));
}

Var QaModel::encode_query(Graph& g, const corpus::Tokens& query, const Dropout& drop) const {
  if (query.size() > config_.max_query_len) throw std::invalid_argument("encode_query: query exceeds max_query_len");
  return query_rnn_.forward(g, drop(highway_.forward(g, embed(g, query, drop))));
}

Var QaModel::memory(Graph& g, Var context, Var query, const Dropout& drop) const {
  return self_match_.forward(g, attention_.forward(g, context, query).h, drop).o;
}

Var QaModel::loss(Graph& g, Var memory, std::span<const std::size_t> target,
                  std::vector<std::vector<double>>* distributions) const {
  return decoder_.loss(g, memory, target, distributions);
}

DecodeResult QaModel::decode(Graph& g, Var memory, const corpus::Tokens& doc) const {
  DecodeResult r = decoder_.greedy(g, memory, config_.max_answer_len);
  for (auto i : r.answer_indices) r.answer_tokens.push_back(doc.at(i));
  return r;
}

DecodeResult QaModel::predict(const corpus::Tokens& doc, const corpus::Tokens& query) const {
  Graph g;
  const Dropout off;
  Var o = memory(g, encode_context(g, doc, off), encode_query(g, query, off), off);
  return decode(g, o, doc);
}

std::size_t QaModel::load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word vectors " + path.string());
  std::string line;
  std::size_t lineno = 0, replaced = 0;
  const std::size_t d = config_.d;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) continue;
    std::vector<double> values;
    double v = 0.0;
    while (row >> v) values.push_back(v);
    if (!row.eof() || values.size() != d) {
      throw std::runtime_error("word vectors line " + std::to_string(lineno) + ": expected token and " +
                               std::to_string(d) + " numbers");
    }
    const std::size_t id = vocab_.word_id(token);
    if (id == Vocabulary::kUnk && token != vocab_.word(Vocabulary::kUnk)) continue;
    for (std::size_t k = 0; k < d; ++k) word_table_->value(id, k) = values[k];
    ++replaced;
  }
  return replaced;
}

}  // namespace qa4ie::model
