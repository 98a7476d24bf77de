#include "qa4ie/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qa4ie/corpus/tokenize.hpp"

namespace qa4ie::eval {

Tokens normalize_answer(const Tokens& tokens) {
  Tokens out;
  for (const auto& t : tokens) {
    std::string lower = t;
    for (char& c : lower) {
      const auto u = static_cast<unsigned char>(c);
      if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    if (lower == "a" || lower == "an" || lower == "the") continue;
    out.push_back(std::move(lower));
  }
  auto first = std::find_if(out.begin(), out.end(), [](const std::string& t) { return !corpus::is_punctuation_token(t); });
  auto last = std::find_if(out.rbegin(), out.rend(), [](const std::string& t) { return !corpus::is_punctuation_token(t); });
  if (first == out.end()) return {};
  return Tokens(first, last.base());
}

namespace {

void require_gold(std::span<const Tokens> gold) {
  if (gold.empty()) throw std::invalid_argument("at least one gold answer variant is required");
}

double f1_single(const Tokens& pred, const Tokens& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, long> counts;
  for (const auto& t : gold) ++counts[t];
  long common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / static_cast<double>(pred.size());
  const double r = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * p * r / (p + r);
}

}  // namespace

int exact_match(const Tokens& prediction, std::span<const Tokens> gold) {
  require_gold(gold);
  const Tokens p = normalize_answer(prediction);
  for (const auto& g : gold)
    if (normalize_answer(g) == p) return 1;
  return 0;
}

double token_f1(const Tokens& prediction, std::span<const Tokens> gold) {
  require_gold(gold);
  const Tokens p = normalize_answer(prediction);
  double best = 0.0;
  for (const auto& g : gold) best = std::max(best, f1_single(p, normalize_answer(g)));
  return best;
}

QaScores evaluate_qa(std::span<const Tokens> predictions, std::span<const std::vector<Tokens>> gold) {
  if (predictions.size() != gold.size()) {
    throw std::invalid_argument("evaluate_qa: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(gold.size()) + " gold queries");
  }
  QaScores s;
  s.count = gold.size();
  if (gold.empty()) return s;
  double em = 0.0, f1 = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    em += exact_match(predictions[i], gold[i]);
    f1 += token_f1(predictions[i], gold[i]);
  }
  s.exact = static_cast<std::size_t>(em);
  s.em = 100.0 * em / static_cast<double>(gold.size());
  s.f1 = 100.0 * f1 / static_cast<double>(gold.size());
  return s;
}

std::string format_qa_report(const QaScores& scores) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "queries=%zu\nem=%.2f\nf1=%.2f\n", scores.count, scores.em, scores.f1);
  return buf;
}

QaScores parse_qa_report(const std::string& text) {
  QaScores s;
  std::istringstream in(text);
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "queries") s.count = std::stoul(value), ++seen;
    else if (key == "em") s.em = std::stod(value), ++seen;
    else if (key == "f1") s.f1 = std::stod(value), ++seen;
  }
  if (seen != 3) throw std::runtime_error("malformed QA report");
  return s;
}

}  // namespace qa4ie::eval
