#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::corpus {

// Malformed input; `line` is 1-based.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Raw corpus: one {"id","title","tokens","triples":[{"relation","object"}]} per line.
std::string article_to_jsonl(const Article& a);
std::vector<Article> read_raw_corpus(std::istream& in);
std::vector<Article> read_raw_corpus(const std::filesystem::path& path);
std::string raw_corpus_to_string(const std::vector<Article>& corpus);

// Annotated dataset: raw fields plus "queries":[{"query_tokens","answer_tokens","locations","kind"}].
std::string annotated_to_jsonl(const AnnotatedArticle& a);
std::vector<AnnotatedArticle> read_annotated(std::istream& in);
std::vector<AnnotatedArticle> read_annotated(const std::filesystem::path& path);
std::string annotated_to_string(const std::vector<AnnotatedArticle>& corpus);

// Manifests: {"family","bucket","split","ids"} per line. Counts are not
// stored; callers recount against the annotated dataset.
std::string manifests_to_string(const std::vector<DatasetManifest>& manifests);
std::vector<DatasetManifest> read_manifests(std::istream& in);
std::vector<DatasetManifest> read_manifests(const std::filesystem::path& path);

// Every article named by the (family, bucket, split) manifest, in manifest order.
std::vector<AnnotatedArticle> select(const std::vector<AnnotatedArticle>& corpus,
                                     const std::vector<DatasetManifest>& manifests, Family family, Bucket bucket,
                                     Split split);

}  // namespace qa4ie::corpus
