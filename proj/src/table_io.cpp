#include "swcrt/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "swcrt/errors.hpp"

namespace swcrt {

std::string format_g6(double value) {
  if (std::isnan(value)) return "";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

std::string format_full(double value) {
  if (std::isnan(value)) return "";
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& text) {
  size_t begin = 0, end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

double parse_number(const std::string& value, int row, const std::string& column) {
  const std::string text = strip(value);
  if (text.empty())
    throw TypeError("row " + std::to_string(row) + ": missing value in column '" + column + "'");
  try {
    size_t used = 0;
    const double parsed = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw TypeError("row " + std::to_string(row) + ": non-numeric value '" + text + "' in column '" + column + "'");
  }
}

int parse_int(const std::string& value, int row, const std::string& column) {
  const double parsed = parse_number(value, row, column);
  const int as_int = static_cast<int>(parsed);
  if (static_cast<double>(as_int) != parsed)
    throw TypeError("row " + std::to_string(row) + ": column '" + column + "' must be an integer");
  return as_int;
}

}  // namespace

IngestedData ingest_long_format(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("data file is empty");
  const std::vector<std::string> header = split_csv(line);
  int col_cluster = -1, col_period = -1, col_y = -1, col_n = -1, col_treat = -1, col_crossover = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string name = strip(header[i]);
    if (name == "cluster") col_cluster = static_cast<int>(i);
    if (name == "period") col_period = static_cast<int>(i);
    if (name == "y") col_y = static_cast<int>(i);
    if (name == "n") col_n = static_cast<int>(i);
    if (name == "treat") col_treat = static_cast<int>(i);
    if (!options.crossover_column.empty() && name == options.crossover_column)
      col_crossover = static_cast<int>(i);
  }
  if (col_cluster < 0) throw SchemaError("missing column 'cluster'");
  if (col_period < 0) throw SchemaError("missing column 'period'");
  if (col_y < 0) throw SchemaError("missing column 'y'");
  if (!options.crossover_column.empty() && col_crossover < 0)
    throw SchemaError("missing crossover column '" + options.crossover_column + "'");
  if (options.crossover_column.empty() && options.crossover.empty())
    throw SchemaError("no crossover declaration: give a map or a column name");

  IngestedData out;
  out.crossover = options.crossover;
  struct RawRow {
    int cluster, period, trials, treat, row_no;
    double y;
    bool has_treat;
  };
  std::vector<RawRow> raw;
  int row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (strip(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    const auto field = [&](int col) -> const std::string& {
      static const std::string empty;
      return col >= 0 && col < static_cast<int>(fields.size()) ? fields[static_cast<size_t>(col)] : empty;
    };
    RawRow row{};
    row.row_no = row_no;
    row.cluster = parse_int(field(col_cluster), row_no, "cluster");
    row.period = parse_int(field(col_period), row_no, "period");
    row.y = parse_number(field(col_y), row_no, "y");
    row.trials = col_n >= 0 ? parse_int(field(col_n), row_no, "n") : 1;
    if (row.trials < 1) throw SchemaError("row " + std::to_string(row_no) + ": n must be at least 1");
    row.has_treat = col_treat >= 0;
    if (row.has_treat) row.treat = parse_int(field(col_treat), row_no, "treat");
    if (row.period < 1) throw SchemaError("row " + std::to_string(row_no) + ": period must be at least 1");
    out.periods = std::max(out.periods, row.period);
    if (col_crossover >= 0) {
      const int crossover = parse_int(field(col_crossover), row_no, options.crossover_column);
      const auto found = out.crossover.find(row.cluster);
      if (found == out.crossover.end()) {
        out.crossover[row.cluster] = crossover;
      } else if (found->second != crossover) {
        throw ConsistencyError("row " + std::to_string(row_no) + ": conflicting crossover period for cluster " +
                               std::to_string(row.cluster));
      }
    }
    raw.push_back(row);
  }
  if (raw.empty()) throw SchemaError("data file has no rows");

  for (const RawRow& row : raw) {
    const auto found = out.crossover.find(row.cluster);
    if (found == out.crossover.end())
      throw SchemaError("no crossover period declared for cluster " + std::to_string(row.cluster));
    const int crossover = found->second;
    if (crossover < 2 || crossover > out.periods)
      throw ConsistencyError("cluster " + std::to_string(row.cluster) + ": crossover period " +
                             std::to_string(crossover) + " outside 2.." + std::to_string(out.periods));
    Observation obs;
    obs.cluster = row.cluster;
    obs.period = row.period;
    obs.exposure = row.period >= crossover ? row.period - crossover + 1 : 0;
    obs.treat = obs.exposure >= 1 ? 1 : 0;
    obs.y = row.y;
    obs.trials = row.trials;
    if (row.has_treat && row.treat != obs.treat)
      throw ConsistencyError("row " + std::to_string(row.row_no) + ": treat=" + std::to_string(row.treat) +
                             " conflicts with crossover-derived treatment " + std::to_string(obs.treat));
    out.data.rows.push_back(obs);
  }
  return out;
}

std::string dataset_csv(const Dataset& data) {
  std::ostringstream out;
  out << "cluster,period,y,n,treat\n";
  for (const Observation& row : data.rows)
    out << row.cluster << ',' << row.period << ',' << format_full(row.y) << ',' << row.trials << ',' << row.treat
        << '\n';
  return out.str();
}

}  // namespace swcrt
