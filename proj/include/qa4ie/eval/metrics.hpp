#pragma once

#include <span>
#include <string>
#include <vector>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::eval {

using corpus::Tokens;

// Lowercase, drop "a"/"an"/"the", then strip leading and trailing
// punctuation tokens.
Tokens normalize_answer(const Tokens& tokens);

// 1 iff the normalized prediction equals some normalized gold variant.
int exact_match(const Tokens& prediction, std::span<const Tokens> gold);

// Bag-of-tokens F1 after normalization, maximized over gold variants.
// Both empty scores 1, exactly one empty scores 0.
double token_f1(const Tokens& prediction, std::span<const Tokens> gold);

struct QaScores {
  double em = 0.0;  // percent
  double f1 = 0.0;  // percent
  std::size_t count = 0;
  std::size_t exact = 0;  // queries with EM = 1
};

// Mean EM and F1 (as percentages) over gold queries, one prediction each.
QaScores evaluate_qa(std::span<const Tokens> predictions, std::span<const std::vector<Tokens>> gold);

// "EM,F1" style two-decimal report: "queries=<n>\nem=<x.xx>\nf1=<y.yy>\n".
std::string format_qa_report(const QaScores& scores);
QaScores parse_qa_report(const std::string& text);

}  // namespace qa4ie::eval
