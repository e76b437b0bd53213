#include "swcrt/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "swcrt/errors.hpp"

namespace swcrt {

namespace {

std::string trim(const std::string& text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

}  // namespace

FlatConfig FlatConfig::parse_text(const std::string& text) {
  FlatConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected `key = value`");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (config.entries_.count(key))
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    config.entries_[key] = Entry{value, line_no};
  }
  return config;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

bool FlatConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) {
  consumed_.insert(key);
  const auto found = entries_.find(key);
  return found == entries_.end() ? fallback : found->second.value;
}

std::string FlatConfig::require_string(const std::string& key) {
  consumed_.insert(key);
  const auto found = entries_.find(key);
  if (found == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return found->second.value;
}

namespace {

double parse_double(const std::string& key, const std::string& value, int line) {
  try {
    size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' has non-numeric value '" + value + "'");
  }
}

}  // namespace

double FlatConfig::get_double(const std::string& key, double fallback) {
  consumed_.insert(key);
  const auto found = entries_.find(key);
  if (found == entries_.end()) return fallback;
  return parse_double(key, found->second.value, found->second.line);
}

int FlatConfig::get_int(const std::string& key, int fallback) {
  const double value = get_double(key, fallback);
  const int as_int = static_cast<int>(value);
  if (static_cast<double>(as_int) != value) throw ConfigError("key '" + key + "' must be an integer");
  return as_int;
}

long long FlatConfig::get_long(const std::string& key, long long fallback) {
  consumed_.insert(key);
  const auto found = entries_.find(key);
  if (found == entries_.end()) return fallback;
  try {
    size_t used = 0;
    const long long parsed = std::stoll(found->second.value, &used);
    if (used != found->second.value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' must be an integer");
  }
}

std::vector<std::string> FlatConfig::get_list(const std::string& key) {
  consumed_.insert(key);
  std::vector<std::string> items;
  const auto found = entries_.find(key);
  if (found == entries_.end()) return items;
  std::istringstream in(found->second.value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string value = trim(item);
    if (!value.empty()) items.push_back(value);
  }
  return items;
}

std::vector<double> FlatConfig::get_double_list(const std::string& key) {
  const auto found = entries_.find(key);
  const int line = found == entries_.end() ? 0 : found->second.line;
  std::vector<double> values;
  for (const std::string& item : get_list(key)) values.push_back(parse_double(key, item, line));
  return values;
}

void FlatConfig::check_consumed() const {
  for (const auto& [key, entry] : entries_)
    if (!consumed_.count(key))
      throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
}

ScenarioConfig scenario_from_config(FlatConfig& config, RunSettings* settings) {
  ScenarioConfig scenario;
  scenario.clusters = config.get_int("design.clusters", 0);
  scenario.periods = config.get_int("design.periods", 0);
  scenario.cluster_period_size = config.get_int("design.cluster_period_size", 0);

  const std::string family = config.require_string("outcome.family");
  if (family == "continuous") {
    scenario.family = Family::continuous;
  } else if (family == "binary") {
    scenario.family = Family::binary;
  } else {
    throw ConfigError("outcome.family must be continuous or binary");
  }

  scenario.mu = config.get_double("outcome.mu", 0.0);
  scenario.sigma = config.get_double("outcome.sigma", 1.0);
  scenario.baseline_prob = config.get_double("outcome.baseline_prob", 0.2);
  scenario.log_or = config.get_double("outcome.log_or", 0.25);
  if (config.has("outcome.period_effects")) scenario.period_effects = config.get_double_list("outcome.period_effects");

  RandomStructure structure;
  structure.kind = random_kind_from_name(config.require_string("structure.kind"));
  structure.sigma_u = config.get_double("structure.sigma_u", 0.0);
  structure.sigma_v = config.get_double("structure.sigma_v", 0.0);
  structure.sigma_gamma = config.get_double("structure.sigma_gamma", 0.0);
  structure.rho = config.get_double("structure.rho", 0.0);
  structure.sigma_t = config.get_double("structure.sigma_t", 0.0);
  scenario.generating = structure;

  const std::string profile = config.get_string("effect.profile", "linear");
  if (scenario.family == Family::continuous) {
    if (profile == "linear") {
      if (scenario.periods >= 3) scenario.deltas = effect_profile_linear(scenario.periods);
    } else if (profile == "custom") {
      scenario.deltas = config.get_double_list("effect.deltas");
    } else {
      throw ConfigError("effect.profile must be linear or custom");
    }
  } else if (profile != "linear") {
    throw ConfigError("binary scenarios use a constant log odds ratio; set outcome.log_or");
  }

  const std::string treatment = config.get_string("model.treatment", "eti");
  if (treatment == "eti") {
    scenario.fitted_treatment = Treatment::exposure_indicators;
  } else if (treatment == "it") {
    scenario.fitted_treatment = Treatment::immediate;
  } else {
    throw ConfigError("model.treatment must be eti or it");
  }

  std::vector<std::string> working = config.get_list("model.working");
  if (working.empty()) {
    // Default: the generating structure when it is fittable, otherwise exch.
    if (scenario.family == Family::binary) {
      working.push_back(random_kind_name(scenario.generating.kind));
    } else {
      working.push_back("exch");
    }
  }
  for (const std::string& name : working) scenario.working.push_back(random_kind_from_name(name));

  std::vector<std::string> estimators = config.get_list("estimators");
  if (estimators.empty()) estimators = {"model", "classic", "kc", "md", "mbn"};
  for (const std::string& name : estimators) scenario.estimators.push_back(estimator_from_name(name));

  std::vector<std::string> references = config.get_list("references");
  if (references.empty()) references = {"t", "normal"};
  for (const std::string& name : references) scenario.references.push_back(reference_from_name(name));

  scenario.level = config.get_double("inference.level", 0.95);
  scenario.mbn.r = config.get_double("mbn.r", 1.0);
  scenario.mbn.d = config.get_double("mbn.d", 2.0);

  scenario.replications = config.get_int("run.replications", 0);
  scenario.seed = static_cast<std::uint64_t>(config.get_long("run.seed", 0));
  scenario.id = config.get_string("scenario.id", "scenario");

  if (settings) {
    settings->workers = config.get_int("run.workers", 1);
    settings->export_datasets = config.get_int("run.export_datasets", 0);
    if (settings->workers < 1) throw ConfigError("run.workers must be positive");
    if (settings->export_datasets < 0) throw ConfigError("run.export_datasets must be nonnegative");
  }

  config.check_consumed();
  try {
    scenario.validate();
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  if (!(scenario.mbn.r >= 0.0 && scenario.mbn.r <= 1.0)) throw ConfigError("mbn.r must lie in [0,1]");
  if (!(scenario.mbn.d >= 1.0)) throw ConfigError("mbn.d must be at least 1");
  return scenario;
}

ScenarioConfig load_scenario(const std::string& path, RunSettings* settings) {
  FlatConfig config = FlatConfig::parse_file(path);
  return scenario_from_config(config, settings);
}

}  // namespace swcrt
