#include "qa4ie/corpus/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "qa4ie/util/rng.hpp"

namespace qa4ie::corpus {

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";
constexpr std::size_t kSyllables = 14 * 5;

std::string syllable(std::size_t k) { return {kConsonants[k / 5], kVowels[k % 5]}; }

// Distinct pronounceable word for every index.
std::string make_word(std::size_t index) {
  std::string w = syllable(index % kSyllables);
  index /= kSyllables;
  w += syllable(index % kSyllables);
  index /= kSyllables;
  while (index > 0) {
    w += syllable(index % kSyllables);
    index /= kSyllables;
  }
  return w;
}

struct Lexicon {
  std::vector<std::string> relation_words;
  std::vector<std::string> filler_words;
  std::vector<std::string> entity_words;
  std::vector<Tokens> relations;
};

constexpr std::size_t kPunctuation = 2;  // ":" and "."

std::size_t relation_word_count(const SynthSpec& s) { return std::max<std::size_t>(4, (s.vocab_size - kPunctuation) / 5); }
std::size_t filler_word_count(const SynthSpec& s) { return std::max<std::size_t>(4, (s.vocab_size - kPunctuation) / 5); }

Lexicon build_lexicon(const SynthSpec& spec, Rng& rng) {
  Lexicon lex;
  const std::size_t nr = relation_word_count(spec), nf = filler_word_count(spec);
  const std::size_t ne = spec.vocab_size - kPunctuation - nr - nf;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < nr + nf + ne; ++i) words.push_back(make_word(i));
  rng.shuffle(words);
  lex.relation_words.assign(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(nr));
  lex.filler_words.assign(words.begin() + static_cast<std::ptrdiff_t>(nr),
                          words.begin() + static_cast<std::ptrdiff_t>(nr + nf));
  lex.entity_words.assign(words.begin() + static_cast<std::ptrdiff_t>(nr + nf), words.end());

  // Relation phrases of one or two words, fresh words first.
  std::set<Tokens> used;
  std::size_t next = 0;
  std::size_t attempts = 0;
  while (lex.relations.size() < spec.relations) {
    if (++attempts > 100000) throw std::invalid_argument("synth: cannot form enough distinct relations");
    Tokens rel;
    const std::size_t len = rng.between(1, 2);
    for (std::size_t k = 0; k < len; ++k) {
      if (next < lex.relation_words.size()) {
        rel.push_back(lex.relation_words[next++]);
      } else {
        rel.push_back(lex.relation_words[rng.below(lex.relation_words.size())]);
      }
    }
    if (len == 2 && rel[0] == rel[1]) continue;
    if (used.insert(rel).second) lex.relations.push_back(std::move(rel));
  }
  return lex;
}

struct PlannedTriple {
  Tokens relation;
  Tokens object;
  TripleFate fate;
  Tokens sentence;             // empty for noise triples
  std::vector<std::size_t> object_offsets;  // positions of object tokens inside sentence
};

}  // namespace

void SynthSpec::validate() const {
  if (vocab_size < 30) throw std::invalid_argument("synth: vocab_size must be at least 30");
  if (articles == 0) throw std::invalid_argument("synth: articles must be positive");
  if (min_len == 0 || min_len > max_len) throw std::invalid_argument("synth: need 0 < min_len <= max_len");
  if (min_triples == 0 || min_triples > max_triples) throw std::invalid_argument("synth: need 0 < min_triples <= max_triples");
  if (relations < max_triples + 1) throw std::invalid_argument("synth: relations must exceed max_triples");
  for (double f : {seq_fraction, multi_object_fraction, out_of_text_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("synth: fractions must lie in [0, 1]");
  }
  const std::size_t entities = vocab_size - kPunctuation - relation_word_count(*this) - filler_word_count(*this);
  if (entities < 3 * max_triples + 6) throw std::invalid_argument("synth: vocab_size too small for max_triples objects");
  // Shortest possible article: title + "." and per triple relation ":" object ".".
  if (2 + 4 * min_triples > max_len) {
    throw std::invalid_argument("synth: objects cannot fit in max_len tokens");
  }
}

std::size_t SynthCorpus::count(TripleFate fate) const {
  std::size_t n = 0;
  for (const auto& t : truth) n += static_cast<std::size_t>(std::count(t.fates.begin(), t.fates.end(), fate));
  return n;
}

SynthCorpus generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Lexicon lex = build_lexicon(spec, rng);
  auto filler = [&] { return lex.filler_words[rng.below(lex.filler_words.size())]; };

  SynthCorpus out;
  for (std::size_t a = 0; a < spec.articles; ++a) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      std::vector<std::string> entities = lex.entity_words;
      rng.shuffle(entities);
      std::size_t next_entity = 0;
      auto take_entity = [&] { return entities[next_entity++]; };

      std::vector<std::size_t> rel_ids(lex.relations.size());
      for (std::size_t i = 0; i < rel_ids.size(); ++i) rel_ids[i] = i;
      rng.shuffle(rel_ids);

      Tokens title;
      const std::size_t title_len = rng.between(1, 2);
      for (std::size_t k = 0; k < title_len; ++k) title.push_back(take_entity());

      const std::size_t n_triples = rng.between(spec.min_triples, spec.max_triples);
      std::vector<PlannedTriple> plan;
      std::size_t content = title.size() + 1;
      for (std::size_t i = 0; i < n_triples; ++i) {
        PlannedTriple t;
        t.relation = lex.relations[rel_ids[i]];
        const bool seq = rng.bernoulli(spec.seq_fraction);
        t.fate = seq ? TripleFate::Seq : TripleFate::Span;
        const std::size_t len = seq ? rng.between(2, 3) : rng.between(1, 3);
        for (std::size_t k = 0; k < len; ++k) t.object.push_back(take_entity());
        t.sentence = t.relation;
        t.sentence.push_back(":");
        std::vector<bool> gap(len - 1, false);
        if (seq) {
          for (std::size_t k = 0; k + 1 < len; ++k) gap[k] = rng.bernoulli(0.5);
          if (std::none_of(gap.begin(), gap.end(), [](bool b) { return b; })) gap[rng.below(len - 1)] = true;
        }
        for (std::size_t k = 0; k < len; ++k) {
          t.object_offsets.push_back(t.sentence.size());
          t.sentence.push_back(t.object[k]);
          if (k + 1 < len && gap[k]) t.sentence.push_back(filler());
        }
        t.sentence.push_back(".");
        content += t.sentence.size();
        plan.push_back(std::move(t));
      }
      if (content > spec.max_len) continue;

      std::vector<PlannedTriple> noise;
      if (rng.bernoulli(spec.multi_object_fraction)) {
        const std::size_t victim = rng.below(plan.size());
        plan[victim].fate = TripleFate::MultiObject;
        noise.push_back({plan[victim].relation, title, TripleFate::MultiObject, {}, {}});
      }
      if (rng.bernoulli(spec.out_of_text_fraction)) {
        Tokens object{take_entity()};
        noise.push_back({lex.relations[rel_ids[n_triples]], object, TripleFate::OutOfText, {}, {}});
      }

      // Blocks: triple sentences plus filler sentences covering the rest.
      const std::size_t target = std::max(content, rng.between(spec.min_len, spec.max_len));
      std::vector<std::pair<Tokens, std::size_t>> blocks;  // sentence, plan index or npos
      for (std::size_t i = 0; i < plan.size(); ++i) blocks.emplace_back(plan[i].sentence, i);
      std::size_t remaining = target - content;
      while (remaining > 0) {
        const std::size_t k = std::min(remaining, rng.between(3, 6));
        Tokens s;
        for (std::size_t j = 0; j + 1 < k; ++j) s.push_back(filler());
        s.push_back(".");
        blocks.emplace_back(std::move(s), SIZE_MAX);
        remaining -= k;
      }
      rng.shuffle(blocks);

      Article art;
      char id[32];
      std::snprintf(id, sizeof id, "syn-%06zu", a);
      art.id = id;
      art.title = join(title);
      art.tokens = title;
      art.tokens.push_back(".");
      ArticleTruth truth;
      std::vector<AnswerLocation> where(plan.size());
      for (const auto& [sentence, idx] : blocks) {
        if (idx != SIZE_MAX) {
          for (auto off : plan[idx].object_offsets) where[idx].indices.push_back(art.tokens.size() + off);
        }
        art.tokens.insert(art.tokens.end(), sentence.begin(), sentence.end());
      }
      for (std::size_t i = 0; i < plan.size(); ++i) {
        art.triples.push_back({plan[i].relation, plan[i].object});
        truth.fates.push_back(plan[i].fate);
        truth.embedded.push_back(plan[i].fate == TripleFate::MultiObject ? AnswerLocation{} : where[i]);
      }
      for (auto& t : noise) {
        art.triples.push_back({t.relation, t.object});
        truth.fates.push_back(t.fate);
        truth.embedded.emplace_back();
      }
      out.articles.push_back(std::move(art));
      out.truth.push_back(std::move(truth));
      placed = true;
    }
    if (!placed) throw std::invalid_argument("synth: could not fit an article's triples within max_len");
  }
  return out;
}

}  // namespace qa4ie::corpus
