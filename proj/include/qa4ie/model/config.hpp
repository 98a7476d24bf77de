#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace qa4ie::model {

// Flat "key = value" text; '#' starts a comment. Keys are unique.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::string& path);

struct ModelConfig {
  std::size_t d = 16;
  std::size_t char_embed_dim = 8;
  std::size_t char_filters = 16;
  std::size_t char_width = 3;
  double dropout_rate = 0.2;
  std::size_t max_doc_len = 400;
  std::size_t max_query_len = 30;
  std::size_t max_answer_len = 16;
  std::uint64_t seed = 1;

  // Training protocol.
  std::size_t batch_size = 20;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  double learning_rate = 2.0;
  double rho = 0.95;
  double epsilon = 1e-6;

  void validate() const;

  // Returns false for keys this struct does not know. Throws on bad values.
  bool set(const std::string& key, const std::string& value);
  std::string to_text() const;
};

// Applies every pair, rejecting unknown keys by name.
ModelConfig config_from(const KeyValues& kv, ModelConfig base = {});

}  // namespace qa4ie::model
