#include "qa4ie/model/extract.hpp"

#include <map>

#include "qa4ie/model/trainer.hpp"

namespace qa4ie::model {

namespace {

std::vector<eval::ArticleGold> gold_lists(const std::vector<corpus::AnnotatedArticle>& articles) {
  std::vector<eval::ArticleGold> out;
  for (const auto& a : articles) {
    eval::ArticleGold g{a.article.id, a.article.title, {}};
    for (const auto& q : a.queries) g.queries.push_back({q.query_tokens, q.answer_tokens});
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

IeRun run_ie(const QaModel& model, const std::vector<corpus::AnnotatedArticle>& evaluated,
             const std::vector<corpus::AnnotatedArticle>& neighbor_source) {
  const eval::QueryPool all_pools = eval::expand_neighbor_queries(gold_lists(neighbor_source));
  std::map<std::string, const eval::ArticlePool*> by_id;
  for (const auto& p : all_pools) by_id[p.id] = &p;

  // Evaluated articles missing from the neighbor source still get their gold queries.
  const eval::QueryPool own = eval::expand_neighbor_queries(gold_lists(evaluated));
  const ModelConfig& cfg = model.config();
  QaDataset data;
  IeRun run;
  for (std::size_t i = 0; i < evaluated.size(); ++i) {
    const auto& a = evaluated[i].article;
    const auto it = by_id.find(a.id);
    const eval::ArticlePool& pool = it != by_id.end() ? *it->second : own[i];
    QaDocument doc{a.id, a.title, a.tokens};
    if (doc.tokens.size() > cfg.max_doc_len) doc.tokens.resize(cfg.max_doc_len);
    data.docs.push_back(std::move(doc));
    for (const auto& pq : pool.queries) {
      QaExample ex;
      ex.doc = data.docs.size() - 1;
      ex.query = pq.query;
      if (ex.query.size() > cfg.max_query_len) ex.query.resize(cfg.max_query_len);
      if (pq.gold) ex.answer = *pq.gold;
      data.examples.push_back(std::move(ex));
      run.titles.push_back(a.title);
      run.gold.push_back(pq.gold);
      run.gold_queries += pq.gold ? 1 : 0;
      run.predictions.push_back({a.id, pq.query, {}, 0.0, 0.0, false});
    }
  }
  const auto decoded = decode_all(model, data);
  for (std::size_t k = 0; k < decoded.size(); ++k) {
    auto& p = run.predictions[k];
    p.answer = decoded[k].answer_tokens;
    p.score_mul = decoded[k].score_mul;
    p.score_avg = decoded[k].score_avg;
    p.immediate_eos = decoded[k].immediate_eos();
  }
  return run;
}

eval::SweepResult sweep(const IeRun& run, eval::ScoreKind kind, std::span<const double> deltas) {
  std::vector<eval::Judged> judged;
  std::vector<double> observed;
  for (std::size_t k = 0; k < run.predictions.size(); ++k) {
    judged.push_back(eval::judge(run.predictions[k], run.gold[k], kind));
    observed.push_back(judged.back().score);
  }
  if (!deltas.empty()) return eval::sweep_pr_curve(judged, deltas);
  const auto grid = eval::default_delta_grid(observed);
  return eval::sweep_pr_curve(judged, grid);
}

}  // namespace qa4ie::model
