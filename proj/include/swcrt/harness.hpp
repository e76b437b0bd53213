#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swcrt/scenario.hpp"
#include "swcrt/simulate.hpp"

namespace swcrt {

struct RecordRow {
  std::string estimand;  // "tate" | "lte"
  Estimator estimator = Estimator::model;
  Reference reference = Reference::t_small_sample;
  double estimate = 0.0;
  double se = 0.0;
  bool covered = false;
  bool usable = false;  // a finite estimate/SE pair was produced
  bool adjustment_failed = false;
  std::optional<MbnDetail> mbn;
};

struct ReplicationRecord {
  int replication = 0;
  bool fit_converged = false;
  bool boundary = false;
  bool quasi_separation = false;
  bool fit_failed = false;
  std::string failure;
  int events_longest_cell = -1;  // binary scenarios only
  double objective = 0.0;
  int iterations = 0;
  std::vector<RecordRow> rows;
  double mbn_identity_dev = 0.0;
  bool mbn_identity_psd = true;
};

struct SummaryRow {
  std::string scenario;
  std::string estimand;
  Estimator estimator = Estimator::model;
  Reference reference = Reference::t_small_sample;
  int n = 0;
  int excluded = 0;
  double mean_est = 0.0;
  double bias_pct = 0.0;
  double coverage_pct = 0.0;
  double mc_se = 0.0;
  bool converged_only = false;
};

struct SparsityRow {
  std::string scenario;
  std::string bin;  // "0", "1-2", "3-5", "6+"
  std::string estimand;
  Estimator estimator = Estimator::model;
  int n = 0;
  double se_median = 0.0;
  double se_q25 = 0.0;
  double se_q75 = 0.0;
};

struct WorkingRun {
  std::string label;
  RandomKind working = RandomKind::exch;
  std::vector<ReplicationRecord> records;
};

struct ScenarioResult {
  std::vector<WorkingRun> runs;
  std::vector<SummaryRow> summary;
  std::vector<SparsityRow> sparsity;
  bool sparsity_applicable = false;
  double mbn_identity_max_dev = 0.0;
  bool mbn_identity_all_psd = true;
  std::pair<double, double> truth{0.0, 0.0};
};

// One generate-fit-estimate replication under the given working structure.
ReplicationRecord run_replication(const ScenarioConfig& scenario, RandomKind working, int replication);

// Full scenario run. Replications are independent; results are identical for
// any worker count because aggregation folds records in replication order.
ScenarioResult run_scenario(const ScenarioConfig& scenario, int workers = 1);

double bias_percent(const std::vector<double>& estimates, double truth);
std::pair<double, double> coverage_percent(const std::vector<bool>& covered);
std::vector<SparsityRow> sparsity_profile(const std::string& label, const ScenarioConfig& scenario,
                                          const std::vector<ReplicationRecord>& records);

}  // namespace swcrt
