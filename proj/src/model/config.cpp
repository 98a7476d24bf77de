#include "qa4ie/model/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qa4ie::model {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

void ModelConfig::validate() const {
  if (d < 2) throw std::invalid_argument("config: d must be at least 2");
  if (char_width < 1) throw std::invalid_argument("config: char_width must be at least 1");
  if (char_embed_dim < 1) throw std::invalid_argument("config: char_embed_dim must be positive");
  if (char_filters != d) throw std::invalid_argument("config: char_filters must equal d");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("config: dropout_rate must lie in [0, 1)");
  if (max_answer_len < 1) throw std::invalid_argument("config: max_answer_len must be at least 1");
  if (max_doc_len < 1 || max_query_len < 1) throw std::invalid_argument("config: max lengths must be positive");
  if (batch_size < 1) throw std::invalid_argument("config: batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("config: learning_rate must be non-negative");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("config: rho must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
}

bool ModelConfig::set(const std::string& key, const std::string& value) {
  if (key == "d") d = to_uint(key, value);
  else if (key == "char_embed_dim") char_embed_dim = to_uint(key, value);
  else if (key == "char_filters") char_filters = to_uint(key, value);
  else if (key == "char_width") char_width = to_uint(key, value);
  else if (key == "dropout_rate") dropout_rate = to_double(key, value);
  else if (key == "max_doc_len") max_doc_len = to_uint(key, value);
  else if (key == "max_query_len") max_query_len = to_uint(key, value);
  else if (key == "max_answer_len") max_answer_len = to_uint(key, value);
  else if (key == "seed") seed = to_uint(key, value);
  else if (key == "batch_size") batch_size = to_uint(key, value);
  else if (key == "max_epochs") max_epochs = to_uint(key, value);
  else if (key == "patience") patience = to_uint(key, value);
  else if (key == "learning_rate") learning_rate = to_double(key, value);
  else if (key == "rho") rho = to_double(key, value);
  else if (key == "epsilon") epsilon = to_double(key, value);
  else return false;
  return true;
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "d = " << d << "\n"
      << "char_embed_dim = " << char_embed_dim << "\n"
      << "char_filters = " << char_filters << "\n"
      << "char_width = " << char_width << "\n"
      << "dropout_rate = " << dropout_rate << "\n"
      << "max_doc_len = " << max_doc_len << "\n"
      << "max_query_len = " << max_query_len << "\n"
      << "max_answer_len = " << max_answer_len << "\n"
      << "seed = " << seed << "\n"
      << "batch_size = " << batch_size << "\n"
      << "max_epochs = " << max_epochs << "\n"
      << "patience = " << patience << "\n"
      << "learning_rate = " << learning_rate << "\n"
      << "rho = " << rho << "\n"
      << "epsilon = " << epsilon << "\n";
  return out.str();
}

ModelConfig config_from(const KeyValues& kv, ModelConfig base) {
  for (const auto& [k, v] : kv) {
    if (!base.set(k, v)) throw std::invalid_argument("config: unknown key '" + k + "'");
  }
  base.validate();
  return base;
}

}  // namespace qa4ie::model
