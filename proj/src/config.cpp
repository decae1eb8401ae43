#include "factrank/config.hpp"

#include <fstream>
#include <sstream>

namespace factrank {

namespace {

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& raw, const std::string& where) {
  std::string v = trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (!v.empty() && v.front() == '"') throw DataError(where + ": unterminated string");
  return v;
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string where = origin + ":" + std::to_string(lineno);
    std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw DataError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw DataError(where + ": empty section name");
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw DataError(where + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw DataError(where + ": unterminated array");
      std::vector<std::string> items;
      std::string body = value.substr(1, value.size() - 2);
      for (const std::string& piece : split(body, ',')) {
        std::string item = trim(piece);
        if (item.empty()) continue;
        items.push_back(unquote(item, where));
      }
      cfg.lists_[full] = std::move(items);
      cfg.values_[full] = value;
    } else {
      cfg.values_[full] = unquote(value, where);
    }
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(origin_ + ": key '" + key + "' is not an integer: " + it->second);
  }
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(origin_ + ": key '" + key + "' is not a number: " + it->second);
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw DataError(origin_ + ": key '" + key + "' is not a boolean: " + it->second);
}

std::vector<std::string> ConfigFile::get_string_list(const std::string& key) const {
  auto it = lists_.find(key);
  return it == lists_.end() ? std::vector<std::string>{} : it->second;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  ConfigFile f = ConfigFile::parse_file(path);
  PipelineConfig c;
  c.triples_path = f.get_string("paths.triples", "");
  c.entities_path = f.get_string("paths.entities", "");
  c.corpus_path = f.get_string("paths.corpus", "");
  c.dataset_path = f.get_string("paths.dataset", "");
  c.stats_path = f.get_string("paths.stats", "");
  c.model_path = f.get_string("paths.model", "");
  c.runs_dir = f.get_string("paths.runs_dir", "");
  c.reports_dir = f.get_string("paths.reports_dir", "");
  c.judgments_path = f.get_string("paths.judgments", "");
  c.features_path = f.get_string("paths.features", "");
  c.features_layout_path = f.get_string("paths.features_layout", "");

  c.seed = static_cast<std::uint64_t>(f.get_int("seed", 42));
  c.threads = static_cast<int>(f.get_int("threads", 0));
  c.verbose = f.get_bool("verbose", false);

  c.enumeration.max_candidates =
      static_cast<std::size_t>(f.get_int("enum.max_candidates", 0));
  c.enumeration.max_paths_per_pair =
      static_cast<std::size_t>(f.get_int("enum.max_paths_per_pair", 25));

  RankerConfig& r = c.ranker;
  r.type_dim = static_cast<int>(f.get_int("ranker.type_dim", 32));
  r.pred_dim = static_cast<int>(f.get_int("ranker.pred_dim", 32));
  r.rnn_size = static_cast<int>(f.get_int("ranker.rnn_size", 32));
  r.dropout_rate = f.get_double("ranker.dropout", 0.0);
  r.mlp_hidden_layers = static_cast<int>(f.get_int("ranker.mlp_hidden_layers", 1));
  r.mlp_hidden_dim = static_cast<int>(f.get_int("ranker.mlp_hidden_dim", 50));
  r.negatives_per_batch = static_cast<int>(f.get_int("ranker.negatives", 10));
  r.learning_rate = f.get_double("ranker.learning_rate", 0.001);
  r.l2_mlp_kernel = f.get_double("ranker.l2_mlp_kernel", 0.0);
  r.epochs = static_cast<int>(f.get_int("ranker.epochs", 30));
  r.feature_mode = parse_feature_mode(f.get_string("ranker.feature_mode", "NFCM"));
  r.top_types = static_cast<int>(f.get_int("ranker.top_types", 7));
  r.distance_cap = static_cast<int>(f.get_int("ranker.distance_cap", kDefaultDistanceCap));

  c.dataset.max_queries_per_relationship =
      static_cast<std::size_t>(f.get_int("dataset.max_queries_per_relationship", 2000));
  c.dataset.label.max_cooccurring =
      static_cast<std::size_t>(f.get_int("dataset.max_cooccurring", 20));
  c.relationships = f.get_string_list("dataset.relationships");

  c.finalize();
  return c;
}

void PipelineConfig::finalize() {
  ranker.seed = seed;
  ranker.enumeration = enumeration;
  dataset.seed = seed;
  dataset.enumeration = enumeration;
  dataset.threads = threads;
}

}  // namespace factrank
