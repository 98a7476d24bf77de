#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qa4ie/corpus/synth.hpp"
#include "qa4ie/eval/ie.hpp"
#include "qa4ie/model/config.hpp"

namespace qa4ie::cli {

// Parses argv and runs one subcommand. Errors are reported on `err` and
// turned into a nonzero exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Generator keys: vocab_size, articles, min_len, max_len, relations,
// min_triples, max_triples, seq_fraction, multi_object_fraction,
// out_of_text_fraction, seed.
corpus::SynthSpec synth_spec_from(const model::KeyValues& kv, corpus::SynthSpec base = {});

// SVG with recall on x, precision on y, both 0..1, one polyline per curve.
std::string render_pr_plot(const std::vector<std::pair<std::string, std::vector<eval::PRPoint>>>& curves);

// Files written together: each goes to a temporary name first and all are
// renamed into place by commit(). Anything not committed is removed.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  void add(const std::filesystem::path& path, const std::string& content);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;  // temp, final
};

}  // namespace qa4ie::cli
