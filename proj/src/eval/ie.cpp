#include "qa4ie/eval/ie.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qa4ie/eval/metrics.hpp"

namespace qa4ie::eval {

ScoreKind parse_score_kind(std::string_view s) {
  if (s == "mul") return ScoreKind::Mul;
  if (s == "avg") return ScoreKind::Avg;
  throw std::invalid_argument("unknown score kind '" + std::string(s) + "' (expected mul or avg)");
}

std::string_view to_string(ScoreKind k) { return k == ScoreKind::Mul ? "mul" : "avg"; }

QueryPool expand_neighbor_queries(const std::vector<ArticleGold>& gold) {
  std::map<Tokens, std::set<Tokens>> neighbors;
  for (const auto& a : gold) {
    if (a.queries.empty()) throw std::invalid_argument("article '" + a.id + "' has no gold queries");
    for (const auto& q : a.queries)
      for (const auto& r : a.queries)
        if (q.query != r.query) neighbors[q.query].insert(r.query);
  }
  QueryPool pool;
  for (const auto& a : gold) {
    ArticlePool p{a.id, a.title, {}};
    std::set<Tokens> present;
    for (const auto& q : a.queries) {
      if (present.insert(q.query).second) p.queries.push_back({q.query, q.answer});
    }
    std::set<Tokens> extra;
    for (const auto& q : a.queries)
      for (const auto& n : neighbors[q.query])
        if (!present.contains(n)) extra.insert(n);
    for (const auto& n : extra) p.queries.push_back({n, std::nullopt});
    pool.push_back(std::move(p));
  }
  return pool;
}

Judged judge(const Prediction& p, const std::optional<Tokens>& gold, ScoreKind kind) {
  Judged j;
  j.score = p.score(kind);
  j.candidate = !p.answer.empty() && !p.immediate_eos;
  j.gold = gold.has_value();
  if (j.gold && j.candidate) {
    const Tokens variants[] = {*gold};
    j.correct = exact_match(p.answer, variants) == 1;
  }
  return j;
}

std::vector<double> default_delta_grid(std::span<const double> observed) {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  grid.insert(grid.end(), observed.begin(), observed.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

SweepResult sweep_pr_curve(std::span<const Judged> judged, std::span<const double> deltas) {
  // Candidates by descending score; prefix counts answer each delta by bisection.
  std::vector<std::pair<double, bool>> cands;
  std::size_t gold = 0;
  for (const auto& j : judged) {
    gold += j.gold ? 1 : 0;
    if (j.candidate) cands.emplace_back(j.score, j.correct);
  }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> tp_prefix(cands.size() + 1, 0);
  for (std::size_t i = 0; i < cands.size(); ++i) tp_prefix[i + 1] = tp_prefix[i] + (cands[i].second ? 1 : 0);

  SweepResult out;
  bool have_best = false;
  for (double delta : deltas) {
    const auto it = std::partition_point(cands.begin(), cands.end(), [&](const auto& c) { return c.first >= delta; });
    const std::size_t answered = static_cast<std::size_t>(it - cands.begin());
    const std::size_t tp = tp_prefix[answered];
    PRPoint p;
    p.delta = delta;
    p.precision = answered == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(answered);
    p.recall = gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold);
    p.f1 = p.precision + p.recall == 0.0 ? 0.0 : 2.0 * p.precision * p.recall / (p.precision + p.recall);
    if (!have_best || p.f1 > out.best.f1) {
      out.best = p;
      have_best = true;
    }
    out.points.push_back(p);
  }
  return out;
}

std::string format_pr_csv(const SweepResult& sweep) {
  std::string out = "delta,precision,recall,f1\n";
  char buf[160];
  for (const auto& p : sweep.points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f\n", p.delta, p.precision, p.recall, p.f1);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "# best_f1=%.6f delta=%.6f\n", sweep.best.f1, sweep.best.delta);
  out += buf;
  return out;
}

std::vector<PRPoint> parse_pr_csv(const std::string& text) {
  std::vector<PRPoint> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line == "delta,precision,recall,f1") continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + why);
    };
    std::vector<double> v;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(field, &used);
      } catch (const std::exception&) {
        fail("not a number: '" + field + "'");
      }
      if (used != field.size() || !std::isfinite(x)) fail("not a number: '" + field + "'");
      v.push_back(x);
    }
    if (v.size() != 4) fail("expected 4 fields, got " + std::to_string(v.size()));
    for (std::size_t k = 1; k < 4; ++k)
      if (v[k] < 0.0 || v[k] > 1.0) fail("value outside [0,1]");
    if (v[0] < 0.0) fail("negative delta");
    out.push_back({v[0], v[1], v[2], v[3]});
  }
  return out;
}

std::string format_triples(std::span<const Prediction> predictions, std::span<const std::string> titles,
                           ScoreKind kind, double delta) {
  if (titles.size() != predictions.size()) throw std::invalid_argument("format_triples: one title per prediction");
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    if (p.answer.empty() || p.immediate_eos || p.score(kind) < delta) continue;
    std::snprintf(buf, sizeof buf, "%.6f", p.score(kind));
    out += p.article_id + "\t" + titles[i] + "\t" + corpus::join(p.query) + "\t" + corpus::join(p.answer) + "\t" + buf +
           "\n";
  }
  return out;
}

}  // namespace qa4ie::eval
