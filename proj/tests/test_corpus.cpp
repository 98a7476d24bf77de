#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "qa4ie/corpus/io.hpp"
#include "qa4ie/corpus/pipeline.hpp"
#include "qa4ie/corpus/synth.hpp"
#include "qa4ie/corpus/tokenize.hpp"
#include "support.hpp"

using namespace qa4ie;
using namespace qa4ie::corpus;

namespace {

Article make_article(Tokens tokens, std::vector<RelationTriple> triples, std::string id = "a") {
  return {std::move(id), "t", std::move(tokens), std::move(triples)};
}

AnnotatedArticle with_queries(std::string id, std::size_t len, std::size_t queries, std::size_t seq = 0) {
  AnnotatedArticle a;
  a.article.id = std::move(id);
  a.article.title = "t";
  a.article.tokens.assign(len, "w");
  for (std::size_t i = 0; i < queries; ++i) {
    AnnotatedQuery q;
    q.query_tokens = {"r" + std::to_string(i)};
    q.answer_tokens = {"w"};
    q.locations = {{{0}}};
    q.kind = i < seq ? AnswerKind::Seq : AnswerKind::Span;
    a.queries.push_back(q);
  }
  return a;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("The Cat, sat.") == Tokens{"the", "cat", ",", "sat", "."});
  CHECK(tokenize("  ") == Tokens{});
  CHECK(normalize_tokens({"Hello,World", "x"}) == Tokens{"hello", ",", "world", "x"});
  CHECK(normalize_tokens(normalize_tokens({"A.B"})) == normalize_tokens({"A.B"}));
  CHECK(is_punctuation_token(","));
  CHECK_FALSE(is_punctuation_token("a"));
}

TEST_CASE("clipping") {
  const Tokens text = {"book", "by", "alice", "and", "bob", "."};
  SUBCASE("multi-object") {
    ClipReport r;
    Article out = clip_triples(
        make_article(text, {{{"author"}, {"alice"}}, {{"author"}, {"bob"}}, {{"genre"}, {"book"}}}), &r);
    CHECK(out.triples == std::vector<RelationTriple>{{{"genre"}, {"book"}}});
    CHECK(r.multi_object == 2);
  }
  SUBCASE("out of text") {
    ClipReport r;
    Article out = clip_triples(make_article(text, {{{"place"}, {"zanzibar"}}, {{"who"}, {"alice", "bob"}}}), &r);
    CHECK(out.triples == std::vector<RelationTriple>{{{"who"}, {"alice", "bob"}}});
    CHECK(r.out_of_text == 1);
  }
  SUBCASE("duplicates collapse") {
    ClipReport r;
    Article out = clip_triples(make_article(text, {{{"who"}, {"alice"}}, {{"who"}, {"alice"}}}), &r);
    CHECK(out.triples.size() == 1);
    CHECK(r.duplicate == 1);
    CHECK(r.multi_object == 0);
  }
  SUBCASE("idempotent on generated noise") {
    SynthSpec s;
    s.articles = 100;
    s.multi_object_fraction = 0.5;
    s.out_of_text_fraction = 0.5;
    for (const auto& a : generate_synthetic_corpus(s).articles) CHECK(clip_triples(clip_triples(a)) == clip_triples(a));
  }
}

TEST_CASE("span matching") {
  CHECK(find_span_locations({"x", "y", "x", "y"}, {"x", "y"}) ==
        std::vector<AnswerLocation>{{{0, 1}}, {{2, 3}}});
  CHECK(find_span_locations({"x"}, {"x", "y"}).empty());
  CHECK(find_span_locations({"a", "b", "c"}, {"a", "b", "c"}) == std::vector<AnswerLocation>{{{0, 1, 2}}});
  // brute force over every window
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Tokens doc, obj;
    for (std::size_t i = rng.between(1, 12); i > 0; --i) doc.push_back(rng.bernoulli(0.5) ? "a" : "b");
    for (std::size_t i = rng.between(1, 3); i > 0; --i) obj.push_back(rng.bernoulli(0.5) ? "a" : "b");
    std::vector<AnswerLocation> expect;
    for (std::size_t s = 0; s + obj.size() <= doc.size(); ++s) {
      if (std::equal(obj.begin(), obj.end(), doc.begin() + static_cast<std::ptrdiff_t>(s))) {
        AnswerLocation loc;
        for (std::size_t k = 0; k < obj.size(); ++k) loc.indices.push_back(s + k);
        expect.push_back(loc);
      }
    }
    CHECK(find_span_locations(doc, obj) == expect);
  }
}

TEST_CASE("subsequence matching") {
  CHECK(find_subsequence_location({"a", "b", "c", "d"}, {"a", "c"})->indices == std::vector<std::size_t>{0, 2});
  CHECK(find_subsequence_location({"a", "b", "a", "c"}, {"a", "a"})->indices == std::vector<std::size_t>{0, 2});
  CHECK_FALSE(find_subsequence_location({"a", "b"}, {"b", "a"}).has_value());
  // greedy-scan oracle
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Tokens doc, obj;
    for (std::size_t i = rng.between(1, 10); i > 0; --i) doc.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));
    for (std::size_t i = rng.between(1, 4); i > 0; --i) obj.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));
    std::vector<std::size_t> expect;
    std::size_t pos = 0;
    for (const auto& t : obj) {
      while (pos < doc.size() && doc[pos] != t) ++pos;
      if (pos == doc.size()) break;
      expect.push_back(pos++);
    }
    auto got = find_subsequence_location(doc, obj);
    if (expect.size() == obj.size()) {
      REQUIRE(got.has_value());
      CHECK(got->indices == expect);
      CHECK(gather(doc, got->indices) == obj);
    } else {
      CHECK_FALSE(got.has_value());
    }
  }
}

TEST_CASE("answer assignment") {
  AssignReport r;
  AnnotatedArticle a = assign_answers(
      make_article({"x", "y", "z", "x", "y", "q", "z"}, {{{"r1"}, {"x", "y"}}, {{"r2"}, {"z", "q"}}, {{"r3"}, {"q", "x"}}}),
      &r);
  REQUIRE(a.queries.size() == 2);
  CHECK(a.queries[0].kind == AnswerKind::Span);
  CHECK(a.queries[0].locations.size() == 2);
  CHECK(a.queries[1].kind == AnswerKind::Seq);
  CHECK(a.queries[1].locations == std::vector<AnswerLocation>{{{2, 5}}});
  CHECK(r.span == 1);
  CHECK(r.seq == 1);
  CHECK(r.unmatched == 1);
}

TEST_CASE("generated corpora agree with their bookkeeping") {
  for (double frac : {0.0, 0.13, 0.5}) {
    SynthSpec s;
    s.articles = 100;
    s.seq_fraction = frac;
    s.multi_object_fraction = 0.2;
    s.out_of_text_fraction = 0.2;
    s.seed = 17;
    const SynthCorpus syn = generate_synthetic_corpus(s);
    ClipReport clip;
    AssignReport assign;
    std::size_t seq_queries = 0, queries = 0;
    for (std::size_t i = 0; i < syn.articles.size(); ++i) {
      const Article clipped = clip_triples(syn.articles[i], &clip);
      const AnnotatedArticle ann = assign_answers(clipped, &assign);
      const ArticleTruth& truth = syn.truth[i];
      std::vector<std::size_t> kept;
      for (std::size_t k = 0; k < truth.fates.size(); ++k)
        if (truth.fates[k] == TripleFate::Span || truth.fates[k] == TripleFate::Seq) kept.push_back(k);
      REQUIRE(ann.queries.size() == kept.size());
      for (std::size_t q = 0; q < kept.size(); ++q) {
        const auto& query = ann.queries[q];
        const TripleFate fate = truth.fates[kept[q]];
        CHECK(query.kind == (fate == TripleFate::Seq ? AnswerKind::Seq : AnswerKind::Span));
        CHECK(query.locations.front() == truth.embedded[kept[q]]);
        for (const auto& loc : query.locations) CHECK(gather(ann.article.tokens, loc.indices) == query.answer_tokens);
        seq_queries += query.kind == AnswerKind::Seq;
        ++queries;
      }
    }
    CHECK(clip.multi_object == syn.count(TripleFate::MultiObject));
    CHECK(clip.out_of_text == syn.count(TripleFate::OutOfText));
    CHECK(assign.unmatched == 0);
    CHECK(seq_queries == syn.count(TripleFate::Seq));
    if (frac == 0.0) CHECK(seq_queries == 0);
    if (frac == 0.13) CHECK(std::abs(100.0 * seq_queries / queries - 13.0) <= 5.0);
  }
}

TEST_CASE("generator determinism and validation") {
  SynthSpec s;
  s.articles = 20;
  s.seq_fraction = 0.3;
  CHECK(raw_corpus_to_string(generate_synthetic_corpus(s).articles) ==
        raw_corpus_to_string(generate_synthetic_corpus(s).articles));
  s.seed = 2;
  const auto other = generate_synthetic_corpus(s).articles;
  s.seed = 1;
  CHECK(raw_corpus_to_string(other) != raw_corpus_to_string(generate_synthetic_corpus(s).articles));
  for (const auto& a : other) {
    CHECK(a.tokens.size() >= s.min_len);
    CHECK(a.tokens.size() <= s.max_len);
  }
  SynthSpec bad = s;
  bad.max_len = 10;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad), std::invalid_argument);
  bad = s;
  bad.seq_fraction = 1.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad), std::invalid_argument);
}

TEST_CASE("distillation") {
  std::vector<AnnotatedArticle> c = {with_queries("five", 10, 5), with_queries("six", 10, 6), with_queries("nine", 10, 9)};
  auto kept = distill(c, 6);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].article.id == "six");
  CHECK(distill(c, 0) == c);
  CHECK(distill(c, kDefaultMinTriples).size() == 2);
}

TEST_CASE("buckets") {
  CHECK(bucket_of(1) == Bucket::S);
  CHECK(bucket_of(399) == Bucket::S);
  CHECK(bucket_of(400) == Bucket::M);
  CHECK(bucket_of(700) == Bucket::M);
  CHECK(bucket_of(701) == Bucket::L);
}

TEST_CASE("bucket and split") {
  std::vector<AnnotatedArticle> c;
  for (int i = 0; i < 11; ++i) c.push_back(with_queries("s" + std::to_string(i), 50, 6));
  for (int i = 0; i < 4; ++i) c.push_back(with_queries("q" + std::to_string(i), 50, 6, 1));
  for (int i = 0; i < 23; ++i) c.push_back(with_queries("m" + std::to_string(i), 500, 7));
  c.push_back(with_queries("l0", 900, 6));
  auto manifests = bucket_and_split(c, 3);
  REQUIRE(manifests.size() == 18);
  auto find = [&](Family f, Bucket b, Split s) -> const DatasetManifest& {
    return *std::find_if(manifests.begin(), manifests.end(), [&](const DatasetManifest& m) {
      return m.family == f && m.bucket == b && m.split == s;
    });
  };
  CHECK(find(Family::Span, Bucket::S, Split::Train).ids.size() == 5);
  CHECK(find(Family::Span, Bucket::S, Split::Dev).ids.size() == 1);
  CHECK(find(Family::Span, Bucket::S, Split::Test).ids.size() == 5);
  // 15 SEQ-S: dev 1, test 6, train 8
  CHECK(find(Family::Seq, Bucket::S, Split::Dev).ids.size() == 1);
  CHECK(find(Family::Seq, Bucket::S, Split::Test).ids.size() == 6);
  CHECK(find(Family::Seq, Bucket::S, Split::Train).ids.size() == 8);
  // 23 M: dev 2, test 10, train 11
  CHECK(find(Family::Span, Bucket::M, Split::Train).ids.size() == 11);
  CHECK(find(Family::Span, Bucket::L, Split::Train).ids.size() == 1);
  CHECK(find(Family::Span, Bucket::L, Split::Dev).ids.empty());

  std::map<std::string, std::size_t> length;
  std::map<std::string, bool> has_seq;
  for (const auto& a : c) {
    length[a.article.id] = a.article.tokens.size();
    has_seq[a.article.id] = a.article.id[0] == 'q';
  }
  for (Family f : {Family::Span, Family::Seq}) {
    std::multiset<std::string> seen;
    for (const auto& m : manifests) {
      if (m.family != f) continue;
      for (const auto& id : m.ids) {
        seen.insert(id);
        CHECK(bucket_of(length[id]) == m.bucket);
        if (f == Family::Span) CHECK_FALSE(has_seq[id]);
      }
    }
    std::set<std::string> unique(seen.begin(), seen.end());
    CHECK(unique.size() == seen.size());  // disjoint
    CHECK(seen.size() == (f == Family::Span ? 35u : 39u));  // exhaustive
  }
  CHECK(bucket_and_split(c, 3) == manifests);
  CHECK(bucket_and_split(c, 4) != manifests);
}

TEST_CASE("stats") {
  std::vector<AnnotatedArticle> c;
  for (int i = 0; i < 11; ++i) c.push_back(with_queries("s" + std::to_string(i), 50, 6, i % 3 == 0 ? 2 : 0));
  auto manifests = bucket_and_split(c, 1);
  recount(manifests, c);
  auto rows = compute_stats(manifests);
  const std::string csv = stats_csv(rows);
  CHECK(csv.rfind("family,bucket,docs,triples,seq_triples,pct_seq\n", 0) == 0);
  CHECK(csv.find("SEQ,S,11,66,8,12.12") != std::string::npos);
  CHECK(csv.find("SPAN,S,7,42,0,0.00") != std::string::npos);
  CHECK(csv.find("SEQ,Total,11,66,8,12.12") != std::string::npos);
  const std::string table = stats_table(rows);
  for (const char* col : {"S", "M", "L", "Total", "# Docs", "# Triples", "%Seq-triples"})
    CHECK(table.find(col) != std::string::npos);
}

TEST_CASE("io round trips and errors") {
  const auto ann = testing::tiny_corpus(5, 0.3, 9);
  std::vector<Article> raw;
  for (const auto& a : ann) raw.push_back(a.article);
  {
    std::istringstream in(raw_corpus_to_string(raw));
    CHECK(read_raw_corpus(in) == raw);
  }
  {
    std::istringstream in(annotated_to_string(ann));
    CHECK(read_annotated(in) == ann);
  }
  auto manifests = bucket_and_split(ann, 1);
  {
    std::istringstream in(manifests_to_string(manifests));
    auto back = read_manifests(in);
    recount(back, ann);
    recount(manifests, ann);
    CHECK(back == manifests);
  }
  {
    std::istringstream in("{\"id\":\"a\",\"title\":\"t\",\"tokens\":[\"x\"],\"triples\":[]}\n{not json}\n");
    try {
      read_raw_corpus(in);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  {
    AnnotatedArticle bad = ann[0];
    bad.queries[0].locations[0].indices[0] = 0;
    std::istringstream in(annotated_to_jsonl(bad) + "\n");
    if (gather(bad.article.tokens, bad.queries[0].locations[0].indices) != bad.queries[0].answer_tokens)
      CHECK_THROWS_AS(read_annotated(in), FormatError);
  }
  {
    std::istringstream in(article_to_jsonl(raw[0]) + "\n" + article_to_jsonl(raw[0]) + "\n");
    CHECK_THROWS_AS(read_raw_corpus(in), FormatError);
  }
}

TEST_CASE("select follows the manifest") {
  const auto ann = testing::tiny_corpus(30, 0.2, 4);
  auto manifests = bucket_and_split(ann, 1);
  auto train = select(ann, manifests, Family::Seq, Bucket::S, Split::Train);
  const auto& m = *std::find_if(manifests.begin(), manifests.end(), [](const DatasetManifest& d) {
    return d.family == Family::Seq && d.bucket == Bucket::S && d.split == Split::Train;
  });
  REQUIRE(train.size() == m.ids.size());
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train[i].article.id == m.ids[i]);
}
