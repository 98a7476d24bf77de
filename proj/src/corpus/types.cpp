#include "qa4ie/corpus/types.hpp"

#include <stdexcept>

namespace qa4ie::corpus {

bool AnswerLocation::contiguous() const {
  for (std::size_t i = 1; i < indices.size(); ++i)
    if (indices[i] != indices[i - 1] + 1) return false;
  return !indices.empty();
}

std::string_view to_string(AnswerKind k) { return k == AnswerKind::Span ? "span" : "seq"; }
std::string_view to_string(Family f) { return f == Family::Span ? "SPAN" : "SEQ"; }

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::S: return "S";
    case Bucket::M: return "M";
    case Bucket::L: return "L";
  }
  return "?";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

AnswerKind parse_answer_kind(std::string_view s) {
  if (s == "span") return AnswerKind::Span;
  if (s == "seq") return AnswerKind::Seq;
  throw std::invalid_argument("unknown answer kind '" + std::string(s) + "'");
}

Family parse_family(std::string_view s) {
  if (s == "SPAN") return Family::Span;
  if (s == "SEQ") return Family::Seq;
  throw std::invalid_argument("unknown family '" + std::string(s) + "'");
}

Bucket parse_bucket(std::string_view s) {
  if (s == "S") return Bucket::S;
  if (s == "M") return Bucket::M;
  if (s == "L") return Bucket::L;
  throw std::invalid_argument("unknown bucket '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

Tokens gather(const Tokens& tokens, const std::vector<std::size_t>& indices) {
  Tokens out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(tokens.at(i));
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace qa4ie::corpus
