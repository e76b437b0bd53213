#include "swcrt/design.hpp"

#include <sstream>

#include "swcrt/errors.hpp"

namespace swcrt {

int Design::crossover_of(int cluster) const {
  if (cluster < 1 || cluster > clusters) throw OutOfRange("cluster id out of range");
  return crossover[static_cast<size_t>(cluster) - 1];
}

Design build_standard_design(int clusters, int periods, int cluster_period_size) {
  if (periods < 3) throw InvalidDesign("a stepped-wedge design needs at least 3 periods");
  if (clusters < periods - 1) throw InvalidDesign("need at least one cluster per sequence");
  if (cluster_period_size < 1) throw InvalidDesign("cluster-period size must be positive");
  const int sequences = periods - 1;
  if (clusters % sequences != 0)
    throw NonDivisibleAllocation("clusters (" + std::to_string(clusters) + ") not divisible by sequences (" +
                                 std::to_string(sequences) + ")");
  Design design;
  design.clusters = clusters;
  design.periods = periods;
  design.cluster_period_size = cluster_period_size;
  design.crossover.resize(static_cast<size_t>(clusters));
  const int per_sequence = clusters / sequences;
  for (int i = 0; i < clusters; ++i) design.crossover[static_cast<size_t>(i)] = i / per_sequence + 2;
  return design;
}

int exposure_time(const Design& design, int cluster, int period) {
  if (period < 1 || period > design.periods) throw OutOfRange("period out of range");
  const int c = design.crossover_of(cluster);
  return period >= c ? period - c + 1 : 0;
}

int FixedEffectsSpec::treatment_col(int exposure) const {
  if (exposure < 1 || exposure > periods - 1) throw OutOfRange("exposure out of range");
  return treatment == Treatment::immediate ? periods : periods + exposure - 1;
}

Eigen::RowVectorXd design_row_for(const FixedEffectsSpec& spec, int period, int exposure) {
  if (period < 1 || period > spec.periods) throw OutOfRange("period out of range");
  if (exposure < 0 || exposure > spec.periods - 1) throw OutOfRange("exposure out of range");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(spec.params());
  row(0) = 1.0;
  if (period >= 2) row(period - 1) = 1.0;  // period 1 is the reference level
  if (exposure >= 1) row(spec.treatment_col(exposure)) = 1.0;
  return row;
}

Eigen::RowVectorXd design_row(const Design& design, const FixedEffectsSpec& spec, int cluster, int period) {
  if (spec.periods != design.periods) throw InvalidParameter("fixed-effects spec and design disagree on periods");
  return design_row_for(spec, period, exposure_time(design, cluster, period));
}

std::string design_table_csv(const Design& design) {
  std::ostringstream out;
  out << "cluster,sequence,crossover_period\n";
  for (int i = 1; i <= design.clusters; ++i)
    out << i << ',' << design.sequence_of(i) << ',' << design.crossover_of(i) << '\n';
  return out.str();
}

}  // namespace swcrt
