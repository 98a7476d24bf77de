#include "qa4ie/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qa4ie/ad/checkpoint.hpp"
#include "qa4ie/corpus/io.hpp"
#include "qa4ie/corpus/pipeline.hpp"
#include "qa4ie/eval/metrics.hpp"
#include "qa4ie/model/extract.hpp"
#include "qa4ie/model/trainer.hpp"

namespace qa4ie::cli {

namespace fs = std::filesystem;
using corpus::AnnotatedArticle;

// ---- output staging ---------------------------------------------------

OutputSet::~OutputSet() {
  std::error_code ec;
  for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
}

void OutputSet::add(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    staged_.emplace_back(tmp, path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
  }
}

void OutputSet::commit() {
  std::vector<fs::path> done;
  try {
    for (const auto& [tmp, final_path] : staged_) {
      fs::rename(tmp, final_path);
      done.push_back(final_path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : done) fs::remove(p, ec);
    throw;
  }
  staged_.clear();
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fails early if files cannot be created in `dir`.
void require_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".qa4ie-write-check";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || v[0] == '-') throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return x;
}

model::KeyValues load_config(const std::string& path) {
  return path.empty() ? model::KeyValues{} : model::read_key_values(path);
}

// ---- data directory -----------------------------------------------------

struct DataDir {
  std::vector<AnnotatedArticle> corpus;
  std::vector<corpus::DatasetManifest> manifests;
};

DataDir load_data(const fs::path& dir) {
  DataDir d;
  d.corpus = corpus::read_annotated(dir / "annotated.jsonl");
  d.manifests = corpus::read_manifests(dir / "manifests.jsonl");
  return d;
}

struct Selection {
  std::string family = "SPAN";
  std::string bucket = "S";
};

std::vector<AnnotatedArticle> pick(const DataDir& d, const Selection& s, const std::string& split) {
  return corpus::select(d.corpus, d.manifests, corpus::parse_family(s.family), corpus::parse_bucket(s.bucket),
                        corpus::parse_split(split));
}

// ---- model directory ----------------------------------------------------

std::unique_ptr<model::QaModel> load_model(const fs::path& dir, std::optional<std::size_t> max_doc_len) {
  model::ModelConfig cfg = model::config_from(model::read_key_values((dir / "config.txt").string()));
  if (max_doc_len) cfg.max_doc_len = *max_doc_len;
  model::Vocabulary vocab = model::Vocabulary::deserialize(read_file(dir / "vocab.txt"));
  const auto records = ad::read_checkpoint(dir / "checkpoint.bin");
  for (const auto& r : records) {
    const std::size_t expect = r.name == "word.embed" ? vocab.word_count()
                             : r.name == "char.embed" ? vocab.char_count()
                                                      : 0;
    if (expect != 0 && r.value.rows() != expect) {
      throw std::runtime_error("vocabulary mismatch: " + r.name + " has " + std::to_string(r.value.rows()) +
                               " rows in the checkpoint but vocab.txt defines " + std::to_string(expect) + " entries");
    }
  }
  auto m = std::make_unique<model::QaModel>(cfg, std::move(vocab));
  ad::assign_records(records, m->parameters());
  return m;
}

// ---- subcommands --------------------------------------------------------

struct SynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

fs::path parent_of(const std::string& file) {
  const fs::path p = fs::path(file).parent_path();
  return p.empty() ? fs::path(".") : p;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  require_writable_dir(parent_of(a.out));
  corpus::SynthSpec spec = synth_spec_from(load_config(a.config));
  if (a.seed) spec.seed = *a.seed;
  const corpus::SynthCorpus syn = corpus::generate_synthetic_corpus(spec);
  OutputSet files;
  files.add(a.out, corpus::raw_corpus_to_string(syn.articles));
  files.commit();
  out << "articles=" << syn.articles.size() << " span=" << syn.count(corpus::TripleFate::Span)
      << " seq=" << syn.count(corpus::TripleFate::Seq) << " multi_object=" << syn.count(corpus::TripleFate::MultiObject)
      << " out_of_text=" << syn.count(corpus::TripleFate::OutOfText) << "\n";
  return 0;
}

struct BuildArgs {
  std::string input, config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> min_triples;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  require_writable_dir(a.out);
  std::uint64_t seed = 1;
  std::size_t min_triples = corpus::kDefaultMinTriples;
  for (const auto& [k, v] : load_config(a.config)) {
    if (k == "seed") {
      seed = parse_size(k, v);
    } else if (k == "min_triples") {
      min_triples = parse_size(k, v);
    } else {
      throw std::invalid_argument("unknown build config key '" + k + "'");
    }
  }
  if (a.seed) seed = *a.seed;
  if (a.min_triples) min_triples = *a.min_triples;

  const auto raw = corpus::read_raw_corpus(fs::path(a.input));
  corpus::ClipReport clip;
  corpus::AssignReport assign;
  std::vector<AnnotatedArticle> annotated;
  for (const auto& article : raw) annotated.push_back(corpus::assign_answers(corpus::clip_triples(article, &clip), &assign));
  const std::size_t before = annotated.size();
  annotated = corpus::distill(std::move(annotated), min_triples);
  auto manifests = corpus::bucket_and_split(annotated, seed);
  corpus::recount(manifests, annotated);
  const auto stats = corpus::compute_stats(manifests);

  std::ostringstream report;
  report << "articles_read=" << raw.size() << "\n"
         << "clipped_multi_object=" << clip.multi_object << "\n"
         << "clipped_out_of_text=" << clip.out_of_text << "\n"
         << "clipped_duplicate=" << clip.duplicate << "\n"
         << "span_queries=" << assign.span << "\n"
         << "seq_queries=" << assign.seq << "\n"
         << "unmatched=" << assign.unmatched << "\n"
         << "min_triples=" << min_triples << "\n"
         << "articles_distilled_away=" << before - annotated.size() << "\n"
         << "articles_kept=" << annotated.size() << "\n"
         << "seed=" << seed << "\n";

  const fs::path dir(a.out);
  OutputSet files;
  files.add(dir / "annotated.jsonl", corpus::annotated_to_string(annotated));
  files.add(dir / "manifests.jsonl", corpus::manifests_to_string(manifests));
  files.add(dir / "stats.csv", corpus::stats_csv(stats));
  files.add(dir / "stats.txt", corpus::stats_table(stats));
  files.add(dir / "report.txt", report.str());
  files.commit();
  out << report.str() << corpus::stats_table(stats);
  return 0;
}

struct TrainArgs {
  std::string data, config, out, vectors;
  Selection sel;
  std::string train_split = "train", dev_split = "dev";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_doc_len;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  model::ModelConfig cfg = model::config_from(load_config(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.max_doc_len) cfg.max_doc_len = *a.max_doc_len;
  cfg.validate();
  const fs::path dir(a.out);
  require_writable_dir(dir);

  const DataDir data = load_data(a.data);
  const auto train_articles = pick(data, a.sel, a.train_split);
  const auto dev_articles = pick(data, a.sel, a.dev_split);
  if (train_articles.empty()) throw std::runtime_error("no articles in the " + a.train_split + " split");
  if (dev_articles.empty()) throw std::runtime_error("no articles in the " + a.dev_split + " split");

  model::QaModel m(cfg, model::build_vocabulary(train_articles));
  if (!a.vectors.empty()) out << "pretrained_rows=" << m.load_word_vectors(a.vectors) << "\n";
  const auto train_set = model::make_dataset(train_articles, cfg);
  const auto dev_set = model::make_dataset(dev_articles, cfg);

  std::string log = "epoch,loss,dev_em,dev_f1\n";
  model::TrainOptions opts;
  opts.on_epoch = [&](const model::EpochMetrics& e) {
    log += model::format_epoch_row(e) + "\n";
    out << model::format_epoch_row(e) << "\n" << std::flush;
  };
  const auto result = model::train(m, train_set, dev_set, opts);
  if (result.skipped > 0) {
    out << "warning: " << result.skipped << " training queries lost every answer to truncation and were skipped\n";
  }

  std::vector<ad::NamedTensor> records;
  for (const ad::Parameter* p : std::as_const(m.parameters()).all()) records.push_back({p->name, p->value});
  OutputSet files;
  files.add(dir / "checkpoint.bin", ad::encode_checkpoint(records));
  files.add(dir / "vocab.txt", m.vocab().serialize());
  files.add(dir / "config.txt", cfg.to_text());
  files.add(dir / "train_log.csv", log);
  files.commit();
  char buf[96];
  std::snprintf(buf, sizeof buf, "best_epoch=%zu best_dev_em=%.2f\n", result.best_epoch, result.best_dev_em);
  out << buf;
  return 0;
}

struct EvalQaArgs {
  std::string model, data, out;
  Selection sel;
  std::string split = "test";
  std::optional<std::size_t> max_doc_len;
};

int cmd_eval_qa(const EvalQaArgs& a, std::ostream& out) {
  const auto m = load_model(a.model, a.max_doc_len);
  const DataDir data = load_data(a.data);
  const auto ds = model::make_dataset(pick(data, a.sel, a.split), m->config());
  const std::string report = eval::format_qa_report(model::evaluate(*m, ds));
  if (!a.out.empty()) {
    OutputSet files;
    files.add(a.out, report);
    files.commit();
  }
  out << report;
  return 0;
}

struct EvalIeArgs {
  std::string model, data, out, score = "avg", deltas;
  Selection sel;
  std::string split = "dev";
  std::optional<std::size_t> max_doc_len;
};

std::vector<double> parse_deltas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const double d = parse_double("--deltas", item);
    if (d < 0.0) throw std::invalid_argument("--deltas: negative threshold " + item);
    out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int cmd_eval_ie(const EvalIeArgs& a, std::ostream& out) {
  const eval::ScoreKind kind = eval::parse_score_kind(a.score);
  const std::vector<double> deltas = parse_deltas(a.deltas);
  const fs::path dir(a.out);
  require_writable_dir(dir);
  const auto m = load_model(a.model, a.max_doc_len);
  const DataDir data = load_data(a.data);
  const auto run = model::run_ie(*m, pick(data, a.sel, a.split), data.corpus);
  const auto result = model::sweep(run, kind, deltas);
  const std::string name(eval::to_string(kind));
  OutputSet files;
  files.add(dir / ("pr_" + name + ".csv"), eval::format_pr_csv(result));
  files.add(dir / ("triples_" + name + ".tsv"),
            eval::format_triples(run.predictions, run.titles, kind, result.best.delta));
  files.commit();
  char buf[160];
  std::snprintf(buf, sizeof buf, "pool=%zu gold=%zu best_f1=%.4f delta=%.4f precision=%.4f recall=%.4f\n",
                run.predictions.size(), run.gold_queries, result.best.f1, result.best.delta, result.best.precision,
                result.best.recall);
  out << buf;
  return 0;
}

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  require_writable_dir(parent_of(a.out));
  std::vector<std::pair<std::string, std::vector<eval::PRPoint>>> curves;
  for (const auto& path : a.inputs) {
    try {
      curves.emplace_back(fs::path(path).stem().string(), eval::parse_pr_csv(read_file(path)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  OutputSet files;
  files.add(a.out, render_pr_plot(curves));
  files.commit();
  out << "curves=" << curves.size() << "\n";
  return 0;
}

void add_selection(CLI::App* app, Selection& sel) {
  app->add_option("--family", sel.family, "SPAN or SEQ")->capture_default_str();
  app->add_option("--bucket", sel.bucket, "S, M or L")->capture_default_str();
}

}  // namespace

// ---- generator keys -------------------------------------------------------

corpus::SynthSpec synth_spec_from(const model::KeyValues& kv, corpus::SynthSpec s) {
  for (const auto& [k, v] : kv) {
    if (k == "vocab_size") s.vocab_size = parse_size(k, v);
    else if (k == "articles") s.articles = parse_size(k, v);
    else if (k == "min_len") s.min_len = parse_size(k, v);
    else if (k == "max_len") s.max_len = parse_size(k, v);
    else if (k == "relations") s.relations = parse_size(k, v);
    else if (k == "min_triples") s.min_triples = parse_size(k, v);
    else if (k == "max_triples") s.max_triples = parse_size(k, v);
    else if (k == "seq_fraction") s.seq_fraction = parse_double(k, v);
    else if (k == "multi_object_fraction") s.multi_object_fraction = parse_double(k, v);
    else if (k == "out_of_text_fraction") s.out_of_text_fraction = parse_double(k, v);
    else if (k == "seed") s.seed = parse_size(k, v);
    else throw std::invalid_argument("unknown synth config key '" + k + "'");
  }
  return s;
}

// ---- plot -----------------------------------------------------------------

std::string render_pr_plot(const std::vector<std::pair<std::string, std::vector<eval::PRPoint>>>& curves) {
  if (curves.empty()) throw std::invalid_argument("plot: no curves");
  constexpr double W = 520, H = 440, L = 60, R = 150, T = 20, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto x = [&](double recall) { return L + recall * pw; };
  auto y = [&](double precision) { return T + (1.0 - precision) * ph; };
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                W, H, W, H);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, pw, ph);
  s += buf;
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"middle\">%.1f</text>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%.1f</text>\n",
                  x(v), T + ph + 14, v, L - 6, y(v) + 3, v);
    s += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">Recall</text>\n"
                "<text x=\"14\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 %.1f)\">Precision</text>\n",
                L + pw / 2, H - 12, T + ph / 2, T + ph / 2);
  s += buf;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = colors[c % std::size(colors)];
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < curves[c].second.size(); ++k) {
      const auto& p = curves[c].second[k];
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", x(p.recall), y(p.precision));
      s += buf;
    }
    s += "\"/>\n";
    const double ly = T + 16 + 18.0 * static_cast<double>(c);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">",
                  L + pw + 10, ly, L + pw + 30, ly, color, L + pw + 36, ly + 4);
    s += buf;
    for (char ch : curves[c].first) {
      switch (ch) {
        case '<': s += "&lt;"; break;
        case '>': s += "&gt;"; break;
        case '&': s += "&amp;"; break;
        default: s += ch;
      }
    }
    s += "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// ---- entry point ----------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"QA-based relation triple extraction toolkit", "qa4ie"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic raw corpus");
  s->add_option("--config", synth.config, "key = value generator settings");
  s->add_option("--seed", synth.seed, "overrides the config seed");
  s->add_option("--out", synth.out, "raw corpus file")->required();

  BuildArgs build;
  auto* b = app.add_subcommand("build", "clip, annotate, distill, bucket and split a raw corpus");
  b->add_option("input", build.input, "raw corpus file")->required();
  b->add_option("--config", build.config, "key = value settings (seed, min_triples)");
  b->add_option("--seed", build.seed, "split shuffle seed");
  b->add_option("--min-triples", build.min_triples, "distillation threshold (default 6)");
  b->add_option("--out", build.out, "output directory")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model on one dataset");
  t->add_option("--data", train.data, "directory written by build")->required();
  add_selection(t, train.sel);
  t->add_option("--train-split", train.train_split)->capture_default_str();
  t->add_option("--dev-split", train.dev_split)->capture_default_str();
  t->add_option("--config", train.config, "key = value model settings");
  t->add_option("--seed", train.seed, "overrides the config seed");
  t->add_option("--max-doc-len", train.max_doc_len, "overrides the config max_doc_len");
  t->add_option("--vectors", train.vectors, "pretrained word vectors, one 'token v1 .. vd' per line");
  t->add_option("--out", train.out, "model directory")->required();

  EvalQaArgs qa;
  auto* q = app.add_subcommand("eval-qa", "EM/F1 of greedy decoding on a dataset split");
  q->add_option("--model", qa.model, "model directory written by train")->required();
  q->add_option("--data", qa.data, "directory written by build")->required();
  add_selection(q, qa.sel);
  q->add_option("--split", qa.split)->capture_default_str();
  q->add_option("--max-doc-len", qa.max_doc_len, "overrides the model max_doc_len");
  q->add_option("--out", qa.out, "report file");

  EvalIeArgs ie;
  auto* e = app.add_subcommand("eval-ie", "precision/recall sweep over neighbor-expanded queries");
  e->add_option("--model", ie.model, "model directory written by train")->required();
  e->add_option("--data", ie.data, "directory written by build")->required();
  add_selection(e, ie.sel);
  e->add_option("--split", ie.split)->capture_default_str();
  e->add_option("--score", ie.score, "confidence score")->check(CLI::IsMember({"mul", "avg"}))->capture_default_str();
  e->add_option("--deltas", ie.deltas, "comma-separated thresholds; default grid when empty");
  e->add_option("--max-doc-len", ie.max_doc_len, "overrides the model max_doc_len");
  e->add_option("--out", ie.out, "output directory")->required();

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "draw PR files as an SVG");
  p->add_option("inputs", plot.inputs, "PR files")->required();
  p->add_option("--out", plot.out, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }
  try {
    if (*s) return cmd_synth(synth, out);
    if (*b) return cmd_build(build, out);
    if (*t) return cmd_train(train, out);
    if (*q) return cmd_eval_qa(qa, out);
    if (*e) return cmd_eval_ie(ie, out);
    if (*p) return cmd_plot(plot, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace qa4ie::cli
