#pragma once

#include <map>
#include <string>

#include "swcrt/dataset.hpp"

namespace swcrt {

// 6-significant-digit display format; NaN renders as an empty field.
std::string format_g6(double value);
// Round-trip precision for the replication log.
std::string format_full(double value);

void write_text_file(const std::string& path, const std::string& content);

struct IngestOptions {
  std::map<int, int> crossover;  // cluster id -> first intervention period
  std::string crossover_column;  // or a column of the data file
};

struct IngestedData {
  Dataset data;  // family left at the caller's choice; trials from the n column
  std::map<int, int> crossover;
  int periods = 0;
};

// Comma-delimited long format with header `cluster,period,y` plus optional
// `n` and `treat` columns. Exposure is derived from the crossover
// declaration; a `treat` column must agree with it.
IngestedData ingest_long_format(const std::string& path, const IngestOptions& options);

// Serialize a dataset in the same long format.
std::string dataset_csv(const Dataset& data);

}  // namespace swcrt
