#pragma once

#include <map>
#include <string>
#include <vector>

#include "swcrt/harness.hpp"
#include "swcrt/table_io.hpp"

namespace swcrt {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by the CLI surface: 0 ok, 2 configuration or schema
// error, 3 I/O error, 4 fit non-convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNonConvergence = 4;

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int workers_override = 0);

struct AnalysisRequest {
  std::string data_path;
  std::map<int, int> crossover;
  std::string crossover_column;
  Treatment model = Treatment::exposure_indicators;
  Family family = Family::continuous;
  RandomKind working = RandomKind::exch;
  std::vector<Estimator> estimators = {Estimator::model, Estimator::classic, Estimator::kc, Estimator::md,
                                       Estimator::mbn};
  std::vector<Reference> references = {Reference::t_small_sample, Reference::normal};
  double level = 0.95;
  MbnParams mbn;
  std::string out_path;  // empty writes to stdout
};

int cmd_analyze(const AnalysisRequest& request);

// Helpers shared with the test-suite.
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string records_csv(const std::vector<WorkingRun>& runs);
std::string sparsity_csv(const std::vector<SparsityRow>& rows);
std::string analysis_report_csv(const std::vector<EstimandRow>& rows);
std::map<int, int> parse_crossover_map(const std::string& text);

}  // namespace swcrt
