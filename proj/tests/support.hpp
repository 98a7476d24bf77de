#pragma once

#include <cmath>
#include <vector>

#include "qa4ie/ad/graph.hpp"
#include "qa4ie/corpus/pipeline.hpp"
#include "qa4ie/corpus/synth.hpp"

namespace qa4ie::testing {

// Moves every parameter to a random point where pre-activations are O(1):
// matrices uniform in +-scale/sqrt(fan_in), row vectors in +-0.5. At the
// small initial scale many gradients sit near the finite-difference noise
// floor, which says nothing about the derivative code.
inline void randomize_for_gradcheck(ad::ParameterSet& params, Rng& rng, double scale = 3.0) {
  for (ad::Parameter* p : params.all()) {
    const double bound = p->value.rows() == 1 ? 0.5 : scale / std::sqrt(static_cast<double>(p->value.rows()));
    for (double& v : p->value.data()) v = rng.uniform(-bound, bound);
  }
}

inline std::vector<corpus::AnnotatedArticle> annotate(const std::vector<corpus::Article>& raw) {
  std::vector<corpus::AnnotatedArticle> out;
  for (const auto& a : raw) out.push_back(corpus::assign_answers(corpus::clip_triples(a)));
  return out;
}

inline std::vector<corpus::AnnotatedArticle> tiny_corpus(std::size_t articles, double seq_fraction,
                                                         std::uint64_t seed) {
  corpus::SynthSpec s;
  s.articles = articles;
  s.seq_fraction = seq_fraction;
  s.seed = seed;
  return annotate(corpus::generate_synthetic_corpus(s).articles);
}

}  // namespace qa4ie::testing
