#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "factrank/distant.hpp"
#include "factrank/ranker.hpp"

namespace factrank {

// Minimal TOML-style file: [section] headers, key = value lines, values are
// strings ("..."), integers, floats, booleans, or arrays of strings. '#'
// comments. Keys are reported as "section.key".
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;                   // scalar raw text
  std::map<std::string, std::vector<std::string>> lists_;
  std::string origin_;
};

// Everything a pipeline run needs; loaded from the config file, then
// overridden by command-line flags.
struct PipelineConfig {
  std::string triples_path;
  std::string entities_path;
  std::string corpus_path;
  std::string dataset_path;
  std::string stats_path;
  std::string model_path;
  std::string runs_dir;
  std::string reports_dir;
  std::string judgments_path;
  std::string features_path;         // optional feature-matrix export
  std::string features_layout_path;

  std::uint64_t seed = 42;
  int threads = 0;  // 0 = all cores
  bool verbose = false;

  EnumConfig enumeration;
  RankerConfig ranker;
  DatasetConfig dataset;
  std::vector<std::string> relationships;  // empty = all in graph

  static PipelineConfig from_file(const std::string& path);
  void finalize();  // propagate seed/threads into nested configs
};

}  // namespace factrank
