#pragma once

#include <filesystem>
#include <span>

#include "qa4ie/corpus/types.hpp"
#include "qa4ie/model/config.hpp"
#include "qa4ie/model/layers.hpp"
#include "qa4ie/model/vocab.hpp"

namespace qa4ie::model {

// Embeddings -> highway -> BiLSTM encoders -> attention flow -> self
// matching -> pointer decoder. Graph-building entry points are exposed so a
// caller can share one context encoding across several queries.
class QaModel {
 public:
  QaModel(ModelConfig config, Vocabulary vocab);
  QaModel(const QaModel&) = delete;
  QaModel& operator=(const QaModel&) = delete;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  // [word embedding ; char CNN] per token: n x 2d.
  Var embed(Graph& g, const corpus::Tokens& tokens, const Dropout& drop) const;
  // Context encoding U: n x 2d.
  Var encode_context(Graph& g, const corpus::Tokens& doc, const Dropout& drop) const;
  // Query encoding V: m x 2d.
  Var encode_query(Graph& g, const corpus::Tokens& query, const Dropout& drop) const;
  // Decoder memory O: n x 2d.
  Var memory(Graph& g, Var context, Var query, const Dropout& drop) const;

  Var loss(Graph& g, Var memory, std::span<const std::size_t> target,
           std::vector<std::vector<double>>* distributions = nullptr) const;
  DecodeResult decode(Graph& g, Var memory, const corpus::Tokens& doc) const;

  // Full inference without dropout.
  DecodeResult predict(const corpus::Tokens& doc, const corpus::Tokens& query) const;

  const Highway& highway() const { return highway_; }
  const CharCnn& char_cnn() const { return char_cnn_; }
  const BiLstm& context_encoder() const { return context_rnn_; }
  const AttentionFlow& attention_flow() const { return attention_; }
  const SelfMatch& self_match() const { return self_match_; }
  const PointerDecoder& decoder() const { return decoder_; }

  // Loads "token v1 ... vd" lines into the word table for known tokens.
  // Returns the number of rows replaced.
  std::size_t load_word_vectors(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  ParameterSet params_;
  Parameter* word_table_ = nullptr;
  CharCnn char_cnn_;
  Highway highway_;
  BiLstm context_rnn_;
  BiLstm query_rnn_;
  AttentionFlow attention_;
  SelfMatch self_match_;
  PointerDecoder decoder_;
};

}  // namespace qa4ie::model
