#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "swcrt/scenario.hpp"

namespace swcrt {

// Flat `section.key = value` configuration file. Parsing is strict: unknown
// and duplicate keys are errors, named with their line number.
class FlatConfig {
 public:
  static FlatConfig parse_file(const std::string& path);
  static FlatConfig parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  long long get_long(const std::string& key, long long fallback);
  std::vector<std::string> get_list(const std::string& key);  // comma separated
  std::vector<double> get_double_list(const std::string& key);

  // Throws ConfigError naming the first key that was never consumed.
  void check_consumed() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries_;
  std::set<std::string> consumed_;
};

struct RunSettings {
  int workers = 1;
  int export_datasets = 0;  // write the first k replication datasets
};

// Build a validated scenario from a config file.
ScenarioConfig load_scenario(const std::string& path, RunSettings* settings = nullptr);
ScenarioConfig scenario_from_config(FlatConfig& config, RunSettings* settings = nullptr);

}  // namespace swcrt
