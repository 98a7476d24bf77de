#include "qa4ie/model/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "qa4ie/ad/adadelta.hpp"

namespace qa4ie::model {

QaDataset make_dataset(const std::vector<corpus::AnnotatedArticle>& articles, const ModelConfig& config) {
  QaDataset out;
  for (const auto& a : articles) {
    QaDocument doc{a.article.id, a.article.title, a.article.tokens};
    if (doc.tokens.size() > config.max_doc_len) doc.tokens.resize(config.max_doc_len);
    out.docs.push_back(std::move(doc));
    for (const auto& q : a.queries) {
      QaExample ex;
      ex.doc = out.docs.size() - 1;
      ex.query = q.query_tokens;
      if (ex.query.size() > config.max_query_len) ex.query.resize(config.max_query_len);
      ex.answer = q.answer_tokens;
      const corpus::AnswerLocation* best = nullptr;
      for (const auto& loc : q.locations) {
        if (loc.indices.empty() || loc.indices.back() >= config.max_doc_len) continue;
        if (!best || loc.indices.front() < best->indices.front()) best = &loc;
      }
      if (best) {
        ex.target = best->indices;
      } else {
        ++out.truncated_away;
      }
      out.examples.push_back(std::move(ex));
    }
  }
  return out;
}

std::string format_epoch_row(const EpochMetrics& m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.2f,%.2f", m.epoch, m.loss, m.dev_em, m.dev_f1);
  return buf;
}

std::vector<DecodeResult> decode_all(const QaModel& model, const QaDataset& data) {
  std::vector<std::vector<std::size_t>> by_doc(data.docs.size());
  for (std::size_t i = 0; i < data.examples.size(); ++i) by_doc[data.examples[i].doc].push_back(i);
  std::vector<DecodeResult> out(data.examples.size());
  const Dropout off;
  for (std::size_t d = 0; d < by_doc.size(); ++d) {
    if (by_doc[d].empty()) continue;
    Graph g;
    Var context = model.encode_context(g, data.docs[d].tokens, off);
    for (std::size_t i : by_doc[d]) {
      Var o = model.memory(g, context, model.encode_query(g, data.examples[i].query, off), off);
      out[i] = model.decode(g, o, data.docs[d].tokens);
    }
  }
  return out;
}

eval::QaScores score(const QaDataset& data, const std::vector<DecodeResult>& decoded) {
  std::vector<corpus::Tokens> predictions;
  std::vector<std::vector<corpus::Tokens>> gold;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    predictions.push_back(decoded.at(i).answer_tokens);
    gold.push_back({data.examples[i].answer});
  }
  return eval::evaluate_qa(predictions, gold);
}

eval::QaScores evaluate(const QaModel& model, const QaDataset& data) { return score(data, decode_all(model, data)); }

TrainResult train(QaModel& model, const QaDataset& train_set, const QaDataset& dev_set, const TrainOptions& options) {
  const ModelConfig& cfg = model.config();
  ParameterSet& params = model.parameters();
  ad::AdaDelta optimizer({cfg.rho, cfg.epsilon, cfg.learning_rate});
  Rng order_rng(cfg.seed ^ 0x5eed0001ULL);
  Rng dropout_rng(cfg.seed ^ 0x5eed0002ULL);
  const Dropout drop{cfg.dropout_rate, true, &dropout_rng};

  std::vector<std::vector<std::size_t>> by_doc(train_set.docs.size());
  TrainResult result;
  for (std::size_t i = 0; i < train_set.examples.size(); ++i) {
    if (train_set.examples[i].target.empty()) {
      ++result.skipped;
      continue;
    }
    by_doc[train_set.examples[i].doc].push_back(i);
  }
  std::vector<std::size_t> doc_order;
  for (std::size_t d = 0; d < by_doc.size(); ++d)
    if (!by_doc[d].empty()) doc_order.push_back(d);
  if (doc_order.empty()) throw std::invalid_argument("train: no trainable examples");

  std::vector<ad::NamedTensor> best;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order_rng.shuffle(doc_order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < doc_order.size();) {
      Graph g;
      std::vector<Var> losses;
      while (start < doc_order.size() && losses.size() < cfg.batch_size) {
        const std::size_t d = doc_order[start++];
        Var context = model.encode_context(g, train_set.docs[d].tokens, drop);
        for (std::size_t i : by_doc[d]) {
          const QaExample& ex = train_set.examples[i];
          Var o = model.memory(g, context, model.encode_query(g, ex.query, drop), drop);
          losses.push_back(model.loss(g, o, ex.target));
        }
      }
      Var total = ad::sum(ad::concat_cols(losses));
      epoch_loss += total.value().item();
      seen += losses.size();
      Var mean = ad::affine(total, 1.0 / static_cast<double>(losses.size()), 0.0);
      params.zero_grad();
      g.backward(mean);
      optimizer.step(params);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.loss = epoch_loss / static_cast<double>(seen);
    const eval::QaScores dev = evaluate(model, dev_set);
    m.dev_em = dev.em;
    m.dev_f1 = dev.f1;
    result.history.push_back(m);
    if (options.on_epoch) options.on_epoch(m);
    if (m.dev_em > result.best_dev_em) {
      result.best_dev_em = m.dev_em;
      result.best_epoch = epoch;
      best.clear();
      for (const Parameter* p : params.all()) best.push_back({p->name, p->value});
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
    if (m.dev_em >= options.stop_at_dev_em) break;
  }
  ad::assign_records(best, params);
  params.zero_grad();
  return result;
}

}  // namespace qa4ie::model
