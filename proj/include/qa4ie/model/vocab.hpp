#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::model {

// Word and character ids. Id 0 is padding and id 1 unknown in both maps.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocabulary();

  std::size_t add_word(std::string_view word);
  std::size_t add_char(unsigned char c);

  std::size_t word_id(std::string_view word) const;
  std::size_t char_id(unsigned char c) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }

  std::size_t word_count() const { return words_.size(); }
  std::size_t char_count() const { return chars_.size(); }

  std::vector<std::size_t> word_ids(const corpus::Tokens& tokens) const;
  std::vector<std::size_t> char_ids(std::string_view word) const;

  // "words <n>" then n tokens, "chars <m>" then m byte values, one per line.
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.chars_ == b.chars_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::vector<int> chars_;  // byte value, -1 for the reserved slots
  std::unordered_map<int, std::size_t> char_index_;
};

// Words and characters of every document and query token.
Vocabulary build_vocabulary(const std::vector<corpus::AnnotatedArticle>& articles);

}  // namespace qa4ie::model
