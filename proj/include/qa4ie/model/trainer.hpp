#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qa4ie/ad/checkpoint.hpp"
#include "qa4ie/corpus/types.hpp"
#include "qa4ie/eval/metrics.hpp"
#include "qa4ie/model/model.hpp"

namespace qa4ie::model {

struct QaDocument {
  std::string id;
  std::string title;
  corpus::Tokens tokens;  // truncated to max_doc_len
};

struct QaExample {
  std::size_t doc = 0;
  corpus::Tokens query;   // truncated to max_query_len
  corpus::Tokens answer;  // gold answer tokens
  // Leftmost location surviving truncation; empty if every location was cut.
  std::vector<std::size_t> target;
};

struct QaDataset {
  std::vector<QaDocument> docs;
  std::vector<QaExample> examples;
  std::size_t truncated_away = 0;  // examples with an empty target
};

QaDataset make_dataset(const std::vector<corpus::AnnotatedArticle>& articles, const ModelConfig& config);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double dev_em = 0.0;
  double dev_f1 = 0.0;
};

// "epoch,loss,dev_em,dev_f1"
std::string format_epoch_row(const EpochMetrics& m);

struct TrainOptions {
  // Stop as soon as dev EM reaches this percentage; > 100 disables.
  double stop_at_dev_em = 101.0;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  double best_dev_em = -1.0;
  std::size_t skipped = 0;  // training examples without a target
};

// AdaDelta on mean per-query loss over mini-batches of whole documents,
// dev EM after every epoch, stop after `patience` epochs without dev EM
// improvement. The model ends holding the best epoch's parameters.
TrainResult train(QaModel& model, const QaDataset& train_set, const QaDataset& dev_set,
                  const TrainOptions& options = {});

std::vector<DecodeResult> decode_all(const QaModel& model, const QaDataset& data);
eval::QaScores evaluate(const QaModel& model, const QaDataset& data);
eval::QaScores score(const QaDataset& data, const std::vector<DecodeResult>& decoded);

}  // namespace qa4ie::model
