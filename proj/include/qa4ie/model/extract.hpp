#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qa4ie/eval/ie.hpp"
#include "qa4ie/model/model.hpp"

namespace qa4ie::model {

// Every pool query of every evaluated article, decoded. Parallel vectors.
struct IeRun {
  std::vector<eval::Prediction> predictions;
  std::vector<std::string> titles;
  std::vector<std::optional<corpus::Tokens>> gold;
  std::size_t gold_queries = 0;
};

// Neighbor queries come from co-occurrence in `neighbor_source`; pools are
// built for `evaluated` only. Documents and queries are truncated exactly as
// for QA evaluation.
IeRun run_ie(const QaModel& model, const std::vector<corpus::AnnotatedArticle>& evaluated,
             const std::vector<corpus::AnnotatedArticle>& neighbor_source);

// An empty grid means the default grid over the observed scores.
eval::SweepResult sweep(const IeRun& run, eval::ScoreKind kind, std::span<const double> deltas = {});

}  // namespace qa4ie::model
