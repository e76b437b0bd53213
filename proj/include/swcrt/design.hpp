#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace swcrt {

// Cross-sectional stepped-wedge layout. Cluster and period ids are 1-based;
// crossover[i-1] is the first intervention period of cluster i.
struct Design {
  int clusters = 0;
  int periods = 0;
  int cluster_period_size = 0;
  std::vector<int> crossover;

  int crossover_of(int cluster) const;
  int sequence_of(int cluster) const { return crossover_of(cluster) - 1; }
};

// Even allocation: I/(J-1) clusters per sequence, sequence s crossing over at
// period s+1, clusters assigned to sequences in ascending id order.
Design build_standard_design(int clusters, int periods, int cluster_period_size);

// Number of periods cluster has spent under intervention at `period` (0 under control).
int exposure_time(const Design& design, int cluster, int period);

enum class Treatment { immediate, exposure_indicators };

// Fixed-effects column layout: intercept, period indicators for periods 2..J,
// then the treatment block (one column for an immediate effect, J-1 exposure
// indicator columns otherwise). The ordering is part of the file contract.
struct FixedEffectsSpec {
  Treatment treatment = Treatment::exposure_indicators;
  int periods = 0;

  int params() const { return treatment == Treatment::immediate ? periods + 1 : 2 * periods - 1; }
  int treatment_cols() const { return treatment == Treatment::immediate ? 1 : periods - 1; }
  // Column index of the exposure-e effect (e in 1..J-1); for an immediate
  // effect the single treatment column regardless of e.
  int treatment_col(int exposure) const;
};

// Design row for an observation with the given period and exposure time.
Eigen::RowVectorXd design_row_for(const FixedEffectsSpec& spec, int period, int exposure);
Eigen::RowVectorXd design_row(const Design& design, const FixedEffectsSpec& spec, int cluster, int period);

// Audit table with header cluster,sequence,crossover_period.
std::string design_table_csv(const Design& design);

}  // namespace swcrt
