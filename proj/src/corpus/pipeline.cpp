#include "qa4ie/corpus/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "qa4ie/util/rng.hpp"

namespace qa4ie::corpus {

ClipReport& ClipReport::operator+=(const ClipReport& o) {
  multi_object += o.multi_object;
  out_of_text += o.out_of_text;
  duplicate += o.duplicate;
  return *this;
}

AssignReport& AssignReport::operator+=(const AssignReport& o) {
  span += o.span;
  seq += o.seq;
  unmatched += o.unmatched;
  return *this;
}

Article clip_triples(const Article& article, ClipReport* report) {
  std::map<Tokens, std::set<Tokens>> objects_by_relation;
  for (const auto& t : article.triples) objects_by_relation[t.relation].insert(t.object);
  const std::unordered_set<std::string> vocabulary(article.tokens.begin(), article.tokens.end());

  ClipReport local;
  Article out = article;
  out.triples.clear();
  std::set<std::pair<Tokens, Tokens>> seen;
  for (const auto& t : article.triples) {
    if (!seen.emplace(t.relation, t.object).second) {
      ++local.duplicate;
    } else if (objects_by_relation[t.relation].size() > 1) {
      ++local.multi_object;
    } else if (!std::all_of(t.object.begin(), t.object.end(),
                            [&](const std::string& w) { return vocabulary.contains(w); })) {
      ++local.out_of_text;
    } else {
      out.triples.push_back(t);
    }
  }
  if (report) *report += local;
  return out;
}

std::vector<AnswerLocation> find_span_locations(const Tokens& tokens, const Tokens& object) {
  std::vector<AnswerLocation> out;
  if (object.empty() || object.size() > tokens.size()) return out;
  for (std::size_t start = 0; start + object.size() <= tokens.size(); ++start) {
    if (std::equal(object.begin(), object.end(), tokens.begin() + static_cast<std::ptrdiff_t>(start))) {
      AnswerLocation loc;
      for (std::size_t k = 0; k < object.size(); ++k) loc.indices.push_back(start + k);
      out.push_back(std::move(loc));
    }
  }
  return out;
}

std::optional<AnswerLocation> find_subsequence_location(const Tokens& tokens, const Tokens& object) {
  if (object.empty()) return std::nullopt;
  AnswerLocation loc;
  std::size_t pos = 0;
  for (const auto& w : object) {
    while (pos < tokens.size() && tokens[pos] != w) ++pos;
    if (pos == tokens.size()) return std::nullopt;
    loc.indices.push_back(pos++);
  }
  return loc;
}

AnnotatedArticle assign_answers(const Article& article, AssignReport* report) {
  AnnotatedArticle out;
  out.article = article;
  out.article.triples.clear();
  AssignReport local;
  for (const auto& t : article.triples) {
    AnnotatedQuery q;
    q.query_tokens = t.relation;
    q.answer_tokens = t.object;
    q.locations = find_span_locations(article.tokens, t.object);
    if (!q.locations.empty()) {
      q.kind = AnswerKind::Span;
      ++local.span;
    } else if (auto loc = find_subsequence_location(article.tokens, t.object)) {
      q.locations.push_back(std::move(*loc));
      q.kind = AnswerKind::Seq;
      ++local.seq;
    } else {
      ++local.unmatched;
      continue;
    }
    out.article.triples.push_back(t);
    out.queries.push_back(std::move(q));
  }
  if (report) *report += local;
  return out;
}

std::vector<AnnotatedArticle> distill(std::vector<AnnotatedArticle> corpus, std::size_t min_triples) {
  std::erase_if(corpus, [&](const AnnotatedArticle& a) { return a.queries.size() < min_triples; });
  return corpus;
}

Bucket bucket_of(std::size_t token_count) {
  if (token_count < 400) return Bucket::S;
  if (token_count <= 700) return Bucket::M;
  return Bucket::L;
}

namespace {

constexpr std::array kFamilies{Family::Span, Family::Seq};
constexpr std::array kBuckets{Bucket::S, Bucket::M, Bucket::L};
constexpr std::array kSplits{Split::Train, Split::Dev, Split::Test};

bool all_span(const AnnotatedArticle& a) {
  return std::all_of(a.queries.begin(), a.queries.end(),
                     [](const AnnotatedQuery& q) { return q.kind == AnswerKind::Span; });
}

std::uint64_t mix_seed(std::uint64_t seed, std::size_t family, std::size_t bucket) {
  // splitmix64 finalizer over the (family, bucket) cell.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (1 + family * 3 + bucket);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void recount(std::vector<DatasetManifest>& manifests, const std::vector<AnnotatedArticle>& corpus) {
  std::unordered_map<std::string, const AnnotatedArticle*> by_id;
  for (const auto& a : corpus) by_id.emplace(a.article.id, &a);
  for (auto& m : manifests) {
    m.docs = m.ids.size();
    m.triples = 0;
    m.seq_triples = 0;
    for (const auto& id : m.ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw std::runtime_error("manifest names unknown article '" + id + "'");
      m.triples += it->second->queries.size();
      for (const auto& q : it->second->queries) m.seq_triples += q.kind == AnswerKind::Seq ? 1 : 0;
    }
  }
}

std::vector<DatasetManifest> bucket_and_split(const std::vector<AnnotatedArticle>& corpus, std::uint64_t seed) {
  std::vector<DatasetManifest> out;
  for (std::size_t fi = 0; fi < kFamilies.size(); ++fi) {
    for (std::size_t bi = 0; bi < kBuckets.size(); ++bi) {
      std::vector<std::string> ids;
      for (const auto& a : corpus) {
        if (bucket_of(a.article.tokens.size()) != kBuckets[bi]) continue;
        if (kFamilies[fi] == Family::Span && !all_span(a)) continue;
        ids.push_back(a.article.id);
      }
      std::sort(ids.begin(), ids.end());
      Rng rng(mix_seed(seed, fi, bi));
      rng.shuffle(ids);
      const std::size_t n = ids.size();
      const std::size_t dev = n / 11;
      const std::size_t test = 5 * n / 11;
      const std::size_t train = n - dev - test;
      const std::array<std::size_t, 3> bounds{0, train, train + dev};
      const std::array<std::size_t, 3> sizes{train, dev, test};
      for (std::size_t si = 0; si < kSplits.size(); ++si) {
        DatasetManifest m;
        m.family = kFamilies[fi];
        m.bucket = kBuckets[bi];
        m.split = kSplits[si];
        m.ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(bounds[si]),
                     ids.begin() + static_cast<std::ptrdiff_t>(bounds[si] + sizes[si]));
        out.push_back(std::move(m));
      }
    }
  }
  recount(out, corpus);
  return out;
}

double StatsRow::pct_seq() const {
  return triples == 0 ? 0.0 : 100.0 * static_cast<double>(seq_triples) / static_cast<double>(triples);
}

std::vector<StatsRow> compute_stats(const std::vector<DatasetManifest>& manifests) {
  std::vector<StatsRow> rows;
  for (Family f : kFamilies) {
    StatsRow total{f, "Total"};
    for (Bucket b : kBuckets) {
      StatsRow row{f, std::string(to_string(b))};
      for (const auto& m : manifests) {
        if (m.family != f || m.bucket != b) continue;
        row.docs += m.docs;
        row.triples += m.triples;
        row.seq_triples += m.seq_triples;
      }
      total.docs += row.docs;
      total.triples += row.triples;
      total.seq_triples += row.seq_triples;
      rows.push_back(row);
    }
    rows.push_back(total);
  }
  return rows;
}

namespace {

std::string pct_string(const StatsRow& r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r.pct_seq());
  return buf;
}

}  // namespace

std::string stats_csv(const std::vector<StatsRow>& rows) {
  std::string out = "family,bucket,docs,triples,seq_triples,pct_seq\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.family)) + "," + r.bucket + "," + std::to_string(r.docs) + "," +
           std::to_string(r.triples) + "," + std::to_string(r.seq_triples) + "," + pct_string(r) + "\n";
  }
  return out;
}

std::string stats_table(const std::vector<StatsRow>& rows) {
  auto cell = [](const std::string& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%12s", s.c_str());
    return std::string(buf);
  };
  auto label = [](const std::string& a, const std::string& b) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-6s %-14s", a.c_str(), b.c_str());
    return std::string(buf);
  };
  std::string out = label("", "") + cell("S") + cell("M") + cell("L") + cell("Total") + "\n";
  for (Family f : kFamilies) {
    std::vector<const StatsRow*> cols;
    for (const auto& r : rows)
      if (r.family == f) cols.push_back(&r);
    const std::string fam(to_string(f));
    auto line = [&](const std::string& name, auto field, bool first) {
      std::string s = label(first ? fam : "", name);
      for (const StatsRow* r : cols) s += cell(field(*r));
      return s + "\n";
    };
    out += line("# Docs", [](const StatsRow& r) { return std::to_string(r.docs); }, true);
    out += line("# Triples", [](const StatsRow& r) { return std::to_string(r.triples); }, false);
    if (f == Family::Seq) {
      out += line("# Seq-triples", [](const StatsRow& r) { return std::to_string(r.seq_triples); }, false);
      out += line("%Seq-triples", [](const StatsRow& r) { return pct_string(r); }, false);
    }
  }
  return out;
}

}  // namespace qa4ie::corpus
