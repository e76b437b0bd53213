#pragma once

#include <optional>
#include <string>

#include "swcrt/model.hpp"
#include "swcrt/sandwich.hpp"

namespace swcrt {

enum class Reference { t_small_sample, normal };

const char* reference_name(Reference reference);
Reference reference_from_name(const std::string& name);

// Averaging contrast over the exposure-effect columns; for an immediate-
// treatment layout both summaries reduce to the single treatment column.
Eigen::VectorXd contrast_tate(const FixedEffectsSpec& spec);
Eigen::VectorXd contrast_lte(const FixedEffectsSpec& spec);
Eigen::VectorXd contrast_exposure(const FixedEffectsSpec& spec, int exposure);

struct EstimandRow {
  std::string estimand;
  Estimator estimator = Estimator::model;
  Reference reference = Reference::t_small_sample;
  double estimate = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int df = 0;
  std::optional<bool> covered;
  bool degenerate = false;
};

// Point estimate, standard error and confidence interval for a linear
// contrast of the fixed effects. Intervals use t with clusters-2 degrees of
// freedom or the normal reference. `critical` may carry a precomputed
// quantile for the (reference, level, df) triple.
EstimandRow infer(const FittedModel& fitted, const VarianceEstimate& variance, const Eigen::VectorXd& contrast,
                  Reference reference, double level, std::optional<double> truth = std::nullopt,
                  const std::string& estimand = "custom", std::optional<double> critical = std::nullopt);

double critical_value(Reference reference, double level, int df);

}  // namespace swcrt
