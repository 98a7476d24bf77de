#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qa4ie/cli/commands.hpp"

namespace fs = std::filesystem;
using namespace qa4ie;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qa4ie");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("qa4ie-cli-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Small corpus built through the CLI itself.
void make_data(const TempDir& t) {
  spit(t / "synth.cfg", "articles = 40\nvocab_size = 120\nseq_fraction = 0.3\nmin_len = 30\nmax_len = 60\n");
  REQUIRE(invoke({"synth", "--config", t / "synth.cfg", "--seed", "5", "--out", t / "raw.jsonl"}).code == 0);
  REQUIRE(invoke({"build", t / "raw.jsonl", "--out", t / "data", "--min-triples", "3"}).code == 0);
}

}  // namespace

TEST_CASE("synth config keys and rejections") {
  model::KeyValues kv{{"articles", "7"}, {"seq_fraction", "0.25"}, {"seed", "9"}};
  const auto spec = cli::synth_spec_from(kv);
  CHECK(spec.articles == 7);
  CHECK(spec.seq_fraction == 0.25);
  CHECK(spec.seed == 9);
  CHECK_THROWS_WITH_AS(cli::synth_spec_from({{"colour", "red"}}), "unknown synth config key 'colour'",
                       std::invalid_argument);
  CHECK_THROWS_AS(cli::synth_spec_from({{"articles", "-3"}}), std::invalid_argument);
  CHECK_THROWS_AS(cli::synth_spec_from({{"seq_fraction", "lots"}}), std::invalid_argument);
}

TEST_CASE("command line seed overrides the config file") {
  TempDir t("seed");
  spit(t / "a.cfg", "articles = 5\nvocab_size = 80\nseed = 1\n");
  REQUIRE(invoke({"synth", "--config", t / "a.cfg", "--out", t / "one.jsonl"}).code == 0);
  REQUIRE(invoke({"synth", "--config", t / "a.cfg", "--seed", "1", "--out", t / "two.jsonl"}).code == 0);
  REQUIRE(invoke({"synth", "--config", t / "a.cfg", "--seed", "2", "--out", t / "three.jsonl"}).code == 0);
  CHECK(slurp(t / "one.jsonl") == slurp(t / "two.jsonl"));
  CHECK(slurp(t / "one.jsonl") != slurp(t / "three.jsonl"));
}

TEST_CASE("build writes every output and is deterministic") {
  TempDir t("build");
  make_data(t);
  for (const char* f : {"annotated.jsonl", "manifests.jsonl", "stats.csv", "stats.txt", "report.txt"}) {
    CHECK(fs::exists(t.path / "data" / f));
  }
  REQUIRE(invoke({"build", t / "raw.jsonl", "--out", t / "again", "--min-triples", "3"}).code == 0);
  CHECK(slurp(t / "data/annotated.jsonl") == slurp(t / "again/annotated.jsonl"));
  CHECK(slurp(t / "data/manifests.jsonl") == slurp(t / "again/manifests.jsonl"));
  CHECK(slurp(t / "data/stats.csv") == slurp(t / "again/stats.csv"));
  // A threshold above every article leaves nothing but still succeeds.
  const auto r = invoke({"build", t / "raw.jsonl", "--out", t / "none", "--min-triples", "1000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("articles_kept=0") != std::string::npos);
}

TEST_CASE("build reports malformed input by line and leaves no partial output") {
  TempDir t("bad");
  make_data(t);
  std::istringstream raw(slurp(t / "raw.jsonl"));
  std::string line, text;
  for (int i = 0; i < 3 && std::getline(raw, line); ++i) text += line + "\n";
  text += "{\"id\": \"x\", \"tokens\": [\n";
  spit(t / "broken.jsonl", text);
  const auto r = invoke({"build", t / "broken.jsonl", "--out", t / "out"});
  CHECK(r.code != 0);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK_FALSE(fs::exists(t.path / "out" / "annotated.jsonl"));

  spit(t / "empty.jsonl", "");
  const auto e = invoke({"build", t / "empty.jsonl", "--out", t / "empty"});
  CHECK(e.code == 0);
  CHECK(fs::exists(t.path / "empty" / "stats.csv"));
}

TEST_CASE("train, evaluate, extract and plot") {
  TempDir t("flow");
  make_data(t);
  spit(t / "model.cfg", "d = 4\nchar_filters = 4\nchar_embed_dim = 4\nmax_epochs = 2\n");
  const auto tr = invoke({"train", "--data", t / "data", "--family", "SEQ", "--config", t / "model.cfg", "--seed", "3",
                       "--out", t / "m"});
  REQUIRE_MESSAGE(tr.code == 0, tr.err);
  for (const char* f : {"checkpoint.bin", "vocab.txt", "config.txt", "train_log.csv"}) CHECK(fs::exists(t.path / "m" / f));
  const std::string log = slurp(t / "m/train_log.csv");
  CHECK(log.rfind("epoch,loss,dev_em,dev_f1\n1,", 0) == 0);
  CHECK(slurp(t / "m/config.txt").find("seed = 3") != std::string::npos);

  const auto qa = invoke({"eval-qa", "--model", t / "m", "--data", t / "data", "--family", "SEQ"});
  REQUIRE_MESSAGE(qa.code == 0, qa.err);
  CHECK(qa.out.find("em=") != std::string::npos);
  CHECK(qa.out.find("f1=") != std::string::npos);
  // Same model twice gives the same report.
  CHECK(invoke({"eval-qa", "--model", t / "m", "--data", t / "data", "--family", "SEQ"}).out == qa.out);

  for (const char* kind : {"mul", "avg"}) {
    const auto ie = invoke({"eval-ie", "--model", t / "m", "--data", t / "data", "--family", "SEQ", "--score", kind,
                         "--deltas", "0,0.5,0.9", "--out", t / "ie"});
    REQUIRE_MESSAGE(ie.code == 0, ie.err);
    const std::string pr = slurp(t.path / "ie" / ("pr_" + std::string(kind) + ".csv"));
    CHECK(pr.rfind("delta,precision,recall,f1\n0.000000,", 0) == 0);
    CHECK(std::count(pr.begin(), pr.end(), '\n') == 5);  // header, three deltas, best-F1 note
    CHECK(fs::exists(t.path / "ie" / ("triples_" + std::string(kind) + ".tsv")));
  }
  CHECK(invoke({"eval-ie", "--model", t / "m", "--data", t / "data", "--score", "max", "--out", t / "ie"}).code != 0);

  const auto pl = invoke({"plot", t / "ie/pr_mul.csv", t / "ie/pr_avg.csv", "--out", t / "pr.svg"});
  REQUIRE_MESSAGE(pl.code == 0, pl.err);
  const std::string svg = slurp(t / "pr.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find(">pr_mul</text>") != std::string::npos);
  CHECK(svg.find(">pr_avg</text>") != std::string::npos);

  SUBCASE("vocabulary file that does not fit the checkpoint") {
    std::istringstream in(slurp(t / "m/vocab.txt"));
    std::string tag, rest;
    std::size_t n = 0;
    in >> tag >> n;
    std::getline(in, rest, '\0');
    spit(t / "m/vocab.txt", "words " + std::to_string(n + 1) + "\nzzqxtra" + rest);
    const auto bad = invoke({"eval-qa", "--model", t / "m", "--data", t / "data", "--family", "SEQ"});
    CHECK(bad.code != 0);
    CHECK(bad.err.find("vocabulary mismatch") != std::string::npos);
  }
}

TEST_CASE("train refuses an unwritable output directory before training") {
  TempDir t("unwritable");
  make_data(t);
  spit(t / "blocker", "a file, not a directory");
  const auto r = invoke({"train", "--data", t / "data", "--family", "SEQ", "--out", t / "blocker/model"});
  CHECK(r.code != 0);
  CHECK(r.err.find("not writable") != std::string::npos);
  CHECK(r.out.empty());  // no epoch rows were printed
}

TEST_CASE("plot geometry and input validation") {
  const auto svg = cli::render_pr_plot({{"single", {{0.0, 0.5, 0.25, 0.0}}}});
  const auto at = svg.find("points=\"");
  REQUIRE(at != std::string::npos);
  const std::string pts = svg.substr(at + 8, svg.find('"', at + 8) - at - 8);
  CHECK(pts.find(' ') == std::string::npos);
  CHECK(std::count(pts.begin(), pts.end(), ',') == 1);
  // recall 0.25 of the 310px-wide plot starting at x=60; precision 0.5 halfway down 370px from y=20.
  CHECK(pts == "137.50,205.00");
  CHECK_THROWS_AS(cli::render_pr_plot({}), std::invalid_argument);

  TempDir t("plot");
  spit(t / "bad.csv", "delta,precision,recall,f1\n0.0,1.0,0.5,0.6\n0.1,1.7,0.2,0.3\n");
  const auto r = invoke({"plot", t / "bad.csv", "--out", t / "x.svg"});
  CHECK(r.code != 0);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK_FALSE(fs::exists(t.path / "x.svg"));
}

TEST_CASE("output sets are all-or-nothing") {
  TempDir t("outset");
  {
    cli::OutputSet s;
    s.add(t.path / "a.txt", "a");
    s.add(t.path / "b.txt", "b");
  }
  CHECK_FALSE(fs::exists(t.path / "a.txt"));
  CHECK(fs::is_empty(t.path));
  {
    cli::OutputSet s;
    s.add(t.path / "a.txt", "a");
    s.add(t.path / "b.txt", "b");
    s.commit();
  }
  CHECK(slurp(t.path / "a.txt") == "a");
  CHECK(slurp(t.path / "b.txt") == "b");
}

TEST_CASE("missing subcommand or required flag is a usage error") {
  CHECK(invoke({}).code != 0);
  CHECK(invoke({"synth"}).code != 0);
  CHECK(invoke({"eval-qa", "--data", "x"}).code != 0);
  const auto h = invoke({"--help"});
  CHECK(h.code == 0);
  for (const char* sub : {"synth", "build", "train", "eval-qa", "eval-ie", "plot"}) {
    CHECK(h.out.find(sub) != std::string::npos);
  }
}
