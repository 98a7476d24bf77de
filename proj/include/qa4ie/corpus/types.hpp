#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qa4ie::corpus {

using Tokens = std::vector<std::string>;

// (e_i, relation, object) with e_i implied by the article title.
struct RelationTriple {
  Tokens relation;
  Tokens object;
  friend bool operator==(const RelationTriple&, const RelationTriple&) = default;
};

struct Article {
  std::string id;
  std::string title;
  Tokens tokens;
  std::vector<RelationTriple> triples;
  friend bool operator==(const Article&, const Article&) = default;
};

enum class AnswerKind { Span, Seq };

// Strictly increasing token positions into an article.
struct AnswerLocation {
  std::vector<std::size_t> indices;
  bool contiguous() const;
  friend bool operator==(const AnswerLocation&, const AnswerLocation&) = default;
};

struct AnnotatedQuery {
  Tokens query_tokens;
  Tokens answer_tokens;
  std::vector<AnswerLocation> locations;
  AnswerKind kind = AnswerKind::Span;
  friend bool operator==(const AnnotatedQuery&, const AnnotatedQuery&) = default;
};

struct AnnotatedArticle {
  Article article;
  std::vector<AnnotatedQuery> queries;
  friend bool operator==(const AnnotatedArticle&, const AnnotatedArticle&) = default;
};

enum class Family { Span, Seq };
enum class Bucket { S, M, L };
enum class Split { Train, Dev, Test };

struct DatasetManifest {
  Family family = Family::Span;
  Bucket bucket = Bucket::S;
  Split split = Split::Train;
  std::vector<std::string> ids;
  std::size_t docs = 0;
  std::size_t triples = 0;
  std::size_t seq_triples = 0;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string_view to_string(AnswerKind k);
std::string_view to_string(Family f);
std::string_view to_string(Bucket b);
std::string_view to_string(Split s);
AnswerKind parse_answer_kind(std::string_view s);
Family parse_family(std::string_view s);
Bucket parse_bucket(std::string_view s);
Split parse_split(std::string_view s);

Tokens gather(const Tokens& tokens, const std::vector<std::size_t>& indices);
std::string join(const Tokens& tokens, std::string_view sep = " ");

}  // namespace qa4ie::corpus
