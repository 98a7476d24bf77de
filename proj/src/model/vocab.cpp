#include "qa4ie/model/vocab.hpp"

#include <sstream>
#include <stdexcept>

namespace qa4ie::model {

Vocabulary::Vocabulary() {
  words_ = {"<pad>", "<unk>"};
  chars_ = {-1, -1};
}

std::size_t Vocabulary::add_word(std::string_view word) {
  auto it = word_index_.find(std::string(word));
  if (it != word_index_.end()) return it->second;
  if (word.empty() || word.find_first_of(" \t\r\n") != std::string_view::npos) {
    throw std::invalid_argument("vocabulary: word must be non-empty without whitespace");
  }
  words_.emplace_back(word);
  word_index_.emplace(std::string(word), words_.size() - 1);
  return words_.size() - 1;
}

std::size_t Vocabulary::add_char(unsigned char c) {
  auto it = char_index_.find(c);
  if (it != char_index_.end()) return it->second;
  chars_.push_back(c);
  char_index_.emplace(c, chars_.size() - 1);
  return chars_.size() - 1;
}

std::size_t Vocabulary::word_id(std::string_view word) const {
  auto it = word_index_.find(std::string(word));
  return it == word_index_.end() ? kUnk : it->second;
}

std::size_t Vocabulary::char_id(unsigned char c) const {
  auto it = char_index_.find(c);
  return it == char_index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::word_ids(const corpus::Tokens& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(word_id(t));
  return out;
}

std::vector<std::size_t> Vocabulary::char_ids(std::string_view word) const {
  std::vector<std::size_t> out;
  out.reserve(word.size());
  for (char c : word) out.push_back(char_id(static_cast<unsigned char>(c)));
  return out;
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  out << "words " << words_.size() - 2 << "\n";
  for (std::size_t i = 2; i < words_.size(); ++i) out << words_[i] << "\n";
  out << "chars " << chars_.size() - 2 << "\n";
  for (std::size_t i = 2; i < chars_.size(); ++i) out << chars_[i] << "\n";
  return out.str();
}

Vocabulary Vocabulary::deserialize(const std::string& text) {
  std::istringstream in(text);
  Vocabulary v;
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "words") throw std::runtime_error("vocabulary: missing words header");
  for (std::size_t i = 0; i < n; ++i) {
    std::string w;
    if (!(in >> w)) throw std::runtime_error("vocabulary: truncated word list");
    if (v.add_word(w) != i + 2) throw std::runtime_error("vocabulary: duplicate word '" + w + "'");
  }
  if (!(in >> tag >> n) || tag != "chars") throw std::runtime_error("vocabulary: missing chars header");
  for (std::size_t i = 0; i < n; ++i) {
    int c = 0;
    if (!(in >> c) || c < 0 || c > 255) throw std::runtime_error("vocabulary: bad character entry");
    if (v.add_char(static_cast<unsigned char>(c)) != i + 2) throw std::runtime_error("vocabulary: duplicate character");
  }
  return v;
}

Vocabulary build_vocabulary(const std::vector<corpus::AnnotatedArticle>& articles) {
  Vocabulary v;
  auto add = [&](const corpus::Tokens& tokens) {
    for (const auto& t : tokens) {
      v.add_word(t);
      for (char c : t) v.add_char(static_cast<unsigned char>(c));
    }
  };
  for (const auto& a : articles) {
    add(a.article.tokens);
    for (const auto& q : a.queries) add(q.query_tokens);
  }
  return v;
}

}  // namespace qa4ie::model
