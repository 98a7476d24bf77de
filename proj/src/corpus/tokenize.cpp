#include "qa4ie/corpus/tokenize.hpp"

#include <cctype>

namespace qa4ie::corpus {

namespace {

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

bool is_ascii_space(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isspace(u);
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      const auto u = static_cast<unsigned char>(c);
      cur.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
    }
  }
  flush();
  return out;
}

Tokens normalize_tokens(const Tokens& tokens) {
  Tokens out;
  for (const auto& t : tokens) {
    for (auto& piece : tokenize(t)) out.push_back(std::move(piece));
  }
  return out;
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token)
    if (!is_ascii_punct(c)) return false;
  return true;
}

}  // namespace qa4ie::corpus
