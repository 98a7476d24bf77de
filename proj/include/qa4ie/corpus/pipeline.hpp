#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::corpus {

struct ClipReport {
  std::size_t multi_object = 0;  // triples sharing a relation with a different object
  std::size_t out_of_text = 0;   // some object token never occurs in the article
  std::size_t duplicate = 0;     // exact repeats of a retained triple
  ClipReport& operator+=(const ClipReport& o);
  std::size_t total() const { return multi_object + out_of_text + duplicate; }
};

// Drops every triple whose relation maps to more than one distinct object
// in this article, then triples with an object token absent from the
// article, then exact duplicates. Relative order of survivors is kept.
Article clip_triples(const Article& article, ClipReport* report = nullptr);

// All windows of `object.size()` consecutive tokens equal to `object`, left to right.
std::vector<AnswerLocation> find_span_locations(const Tokens& tokens, const Tokens& object);

// Leftmost-greedy ordered subsequence match.
std::optional<AnswerLocation> find_subsequence_location(const Tokens& tokens, const Tokens& object);

struct AssignReport {
  std::size_t span = 0;
  std::size_t seq = 0;
  std::size_t unmatched = 0;
  AssignReport& operator+=(const AssignReport& o);
};

// One query per triple: all span matches if any, else the greedy subsequence.
// Triples matching neither are dropped and counted as unmatched.
AnnotatedArticle assign_answers(const Article& article, AssignReport* report = nullptr);

inline constexpr std::size_t kDefaultMinTriples = 6;

// Keeps articles with at least `min_triples` annotated queries.
std::vector<AnnotatedArticle> distill(std::vector<AnnotatedArticle> corpus, std::size_t min_triples);

// len < 400 -> S, 400..700 -> M, > 700 -> L.
Bucket bucket_of(std::size_t token_count);

// SPAN family holds articles whose queries are all span-kind; SEQ holds all.
// Within every (family, bucket) the articles are shuffled with `seed` and cut
// into train/dev/test by floor(n/11) dev and floor(5n/11) test, remainder to
// train. Always returns 18 manifests, family-major then bucket then split.
std::vector<DatasetManifest> bucket_and_split(const std::vector<AnnotatedArticle>& corpus, std::uint64_t seed);

// Fills docs/triples/seq_triples of each manifest from the articles it names.
void recount(std::vector<DatasetManifest>& manifests, const std::vector<AnnotatedArticle>& corpus);

struct StatsRow {
  Family family;
  std::string bucket;  // S, M, L or Total
  std::size_t docs = 0;
  std::size_t triples = 0;
  std::size_t seq_triples = 0;
  double pct_seq() const;
  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

// Per (family, bucket) totals summed over splits, plus a Total row per family.
std::vector<StatsRow> compute_stats(const std::vector<DatasetManifest>& manifests);

// "family,bucket,docs,triples,seq_triples,pct_seq" with a header line.
std::string stats_csv(const std::vector<StatsRow>& rows);
// Human-readable table laid out with S/M/L/Total columns.
std::string stats_table(const std::vector<StatsRow>& rows);

}  // namespace qa4ie::corpus
