#include "qa4ie/corpus/io.hpp"

#include <fstream>
#include <unordered_map>

#include "json.hpp"

namespace qa4ie::corpus {

using json = nlohmann::ordered_json;

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

json article_json(const Article& a) {
  json triples = json::array();
  for (const auto& t : a.triples) triples.push_back({{"relation", t.relation}, {"object", t.object}});
  return {{"id", a.id}, {"title", a.title}, {"tokens", a.tokens}, {"triples", triples}};
}

Tokens tokens_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
  Tokens out;
  for (const auto& t : v) out.push_back(t.get<std::string>());
  return out;
}

Article parse_article(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  Article a;
  a.id = j.at("id").get<std::string>();
  a.title = j.at("title").get<std::string>();
  a.tokens = tokens_field(j, "tokens");
  if (a.tokens.empty()) throw std::invalid_argument("article '" + a.id + "' has no tokens");
  for (const auto& t : j.at("triples")) {
    RelationTriple r{tokens_field(t, "relation"), tokens_field(t, "object")};
    if (r.relation.empty() || r.object.empty()) {
      throw std::invalid_argument("article '" + a.id + "' has a triple with an empty relation or object");
    }
    a.triples.push_back(std::move(r));
  }
  return a;
}

template <typename T, typename Parse>
std::vector<T> read_lines(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError(lineno, e.what());
    }
  }
  return out;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::string article_to_jsonl(const Article& a) { return article_json(a).dump() + "\n"; }

std::vector<Article> read_raw_corpus(std::istream& in) {
  auto out = read_lines<Article>(in, parse_article);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!seen.emplace(out[i].id, i).second) throw FormatError(i + 1, "duplicate article id '" + out[i].id + "'");
  }
  return out;
}

std::vector<Article> read_raw_corpus(const std::filesystem::path& path) {
  auto in = open(path);
  return read_raw_corpus(in);
}

std::string raw_corpus_to_string(const std::vector<Article>& corpus) {
  std::string out;
  for (const auto& a : corpus) out += article_to_jsonl(a);
  return out;
}

std::string annotated_to_jsonl(const AnnotatedArticle& a) {
  json j = article_json(a.article);
  json queries = json::array();
  for (const auto& q : a.queries) {
    json locs = json::array();
    for (const auto& l : q.locations) locs.push_back(l.indices);
    queries.push_back({{"query_tokens", q.query_tokens},
                       {"answer_tokens", q.answer_tokens},
                       {"locations", locs},
                       {"kind", std::string(to_string(q.kind))}});
  }
  j["queries"] = queries;
  return j.dump() + "\n";
}

std::vector<AnnotatedArticle> read_annotated(std::istream& in) {
  return read_lines<AnnotatedArticle>(in, [](const json& j) {
    AnnotatedArticle a;
    a.article = parse_article(j);
    for (const auto& qj : j.at("queries")) {
      AnnotatedQuery q;
      q.query_tokens = tokens_field(qj, "query_tokens");
      q.answer_tokens = tokens_field(qj, "answer_tokens");
      q.kind = parse_answer_kind(qj.at("kind").get<std::string>());
      for (const auto& lj : qj.at("locations")) {
        AnswerLocation loc{lj.get<std::vector<std::size_t>>()};
        for (std::size_t k = 0; k < loc.indices.size(); ++k) {
          if (loc.indices[k] >= a.article.tokens.size() || (k && loc.indices[k] <= loc.indices[k - 1])) {
            throw std::invalid_argument("article '" + a.article.id + "' has an invalid answer location");
          }
        }
        if (gather(a.article.tokens, loc.indices) != q.answer_tokens) {
          throw std::invalid_argument("article '" + a.article.id + "' has a location not matching its answer");
        }
        q.locations.push_back(std::move(loc));
      }
      if (q.locations.empty()) throw std::invalid_argument("article '" + a.article.id + "' has a query without locations");
      a.queries.push_back(std::move(q));
    }
    return a;
  });
}

std::vector<AnnotatedArticle> read_annotated(const std::filesystem::path& path) {
  auto in = open(path);
  return read_annotated(in);
}

std::string annotated_to_string(const std::vector<AnnotatedArticle>& corpus) {
  std::string out;
  for (const auto& a : corpus) out += annotated_to_jsonl(a);
  return out;
}

std::string manifests_to_string(const std::vector<DatasetManifest>& manifests) {
  std::string out;
  for (const auto& m : manifests) {
    json j = {{"family", std::string(to_string(m.family))},
              {"bucket", std::string(to_string(m.bucket))},
              {"split", std::string(to_string(m.split))},
              {"ids", m.ids}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<DatasetManifest> read_manifests(std::istream& in) {
  return read_lines<DatasetManifest>(in, [](const json& j) {
    DatasetManifest m;
    m.family = parse_family(j.at("family").get<std::string>());
    m.bucket = parse_bucket(j.at("bucket").get<std::string>());
    m.split = parse_split(j.at("split").get<std::string>());
    m.ids = j.at("ids").get<std::vector<std::string>>();
    return m;
  });
}

std::vector<DatasetManifest> read_manifests(const std::filesystem::path& path) {
  auto in = open(path);
  return read_manifests(in);
}

std::vector<AnnotatedArticle> select(const std::vector<AnnotatedArticle>& corpus,
                                     const std::vector<DatasetManifest>& manifests, Family family, Bucket bucket,
                                     Split split) {
  std::unordered_map<std::string, const AnnotatedArticle*> by_id;
  for (const auto& a : corpus) by_id.emplace(a.article.id, &a);
  for (const auto& m : manifests) {
    if (m.family != family || m.bucket != bucket || m.split != split) continue;
    std::vector<AnnotatedArticle> out;
    for (const auto& id : m.ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw std::runtime_error("manifest names unknown article '" + id + "'");
      out.push_back(*it->second);
    }
    return out;
  }
  throw std::runtime_error("no manifest for " + std::string(to_string(family)) + "-" +
                           std::string(to_string(bucket)) + " " + std::string(to_string(split)));
}

}  // namespace qa4ie::corpus
