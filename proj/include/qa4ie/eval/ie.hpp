#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::eval {

using corpus::Tokens;

enum class ScoreKind { Mul, Avg };
ScoreKind parse_score_kind(std::string_view s);
std::string_view to_string(ScoreKind k);

struct Prediction {
  std::string article_id;
  Tokens query;
  Tokens answer;  // empty when the decoder stopped at once
  double score_mul = 0.0;
  double score_avg = 0.0;
  bool immediate_eos = false;

  double score(ScoreKind kind) const { return kind == ScoreKind::Mul ? score_mul : score_avg; }
};

struct PoolQuery {
  Tokens query;
  std::optional<Tokens> gold;  // set for ground-truth queries only
};

struct ArticlePool {
  std::string id;
  std::string title;
  std::vector<PoolQuery> queries;
};

using QueryPool = std::vector<ArticlePool>;

struct GoldQuery {
  Tokens query;
  Tokens answer;
};

struct ArticleGold {
  std::string id;
  std::string title;
  std::vector<GoldQuery> queries;
};

// Two queries are neighbors when they co-occur in some article's gold list.
// Each article's pool is its gold list (in order, deduplicated) followed by
// the neighbors of its gold queries that are not gold, in lexicographic order.
QueryPool expand_neighbor_queries(const std::vector<ArticleGold>& gold);

struct PRPoint {
  double delta = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// One pool query after decoding, reduced to what the sweep needs.
struct Judged {
  double score = 0.0;
  bool candidate = false;  // nonempty answer, not an immediate eos
  bool correct = false;    // ground-truth query and EM = 1
  bool gold = false;       // ground-truth query
};

Judged judge(const Prediction& p, const std::optional<Tokens>& gold, ScoreKind kind);

// 0, 0.01, ..., 1 plus every observed score, sorted and deduplicated.
std::vector<double> default_delta_grid(std::span<const double> observed);

struct SweepResult {
  std::vector<PRPoint> points;
  PRPoint best;  // largest F1, earliest delta on ties
};

// At each delta, answered = candidates with score >= delta; precision =
// TP / answered (1 when nothing is answered); recall = TP / #gold.
SweepResult sweep_pr_curve(std::span<const Judged> judged, std::span<const double> deltas);

// PR file: "delta,precision,recall,f1" header, one row per point and a
// trailing "# best_f1=<v> delta=<d>" line.
std::string format_pr_csv(const SweepResult& sweep);

// Rows of a PR file; throws std::runtime_error naming the line on bad input.
std::vector<PRPoint> parse_pr_csv(const std::string& text);

// "id\te_i\tr\te_j\tscore" per answered prediction at `delta`.
std::string format_triples(std::span<const Prediction> predictions, std::span<const std::string> titles,
                           ScoreKind kind, double delta);

}  // namespace qa4ie::eval
