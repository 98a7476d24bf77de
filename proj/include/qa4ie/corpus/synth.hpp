#pragma once

#include <cstdint>
#include <vector>

#include "qa4ie/corpus/types.hpp"

namespace qa4ie::corpus {

// Parameters of the templated corpus generator. Each article is a title
// sentence followed by one sentence per triple ("<relation> : <object> .")
// shuffled among filler sentences. Seq-kind objects are written with filler
// words between their tokens so that no contiguous match exists.
struct SynthSpec {
  std::size_t vocab_size = 200;
  std::size_t articles = 50;
  std::size_t min_len = 30;
  std::size_t max_len = 60;
  std::size_t relations = 24;
  std::size_t min_triples = 6;
  std::size_t max_triples = 8;
  double seq_fraction = 0.0;
  // Per-article probability of an extra triple reusing one relation with a
  // different object (both removed by clipping).
  double multi_object_fraction = 0.0;
  // Per-article probability of an extra triple whose object is not in the text.
  double out_of_text_fraction = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class TripleFate { Span, Seq, MultiObject, OutOfText };

struct ArticleTruth {
  // Parallel to Article::triples.
  std::vector<TripleFate> fates;
  // Where each surviving object was written; empty for clipped triples.
  std::vector<AnswerLocation> embedded;
};

struct SynthCorpus {
  std::vector<Article> articles;
  std::vector<ArticleTruth> truth;

  std::size_t count(TripleFate fate) const;
};

// Deterministic under spec.seed. Throws std::invalid_argument when the spec
// cannot be realised (e.g. triples do not fit in max_len tokens).
SynthCorpus generate_synthetic_corpus(const SynthSpec& spec);

}  // namespace qa4ie::corpus
