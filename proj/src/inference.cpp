#include "swcrt/inference.hpp"

#include <cmath>

#include "swcrt/dist.hpp"
#include "swcrt/errors.hpp"

namespace swcrt {

const char* reference_name(Reference reference) {
  return reference == Reference::t_small_sample ? "t" : "normal";
}

Reference reference_from_name(const std::string& name) {
  if (name == "t") return Reference::t_small_sample;
  if (name == "normal" || name == "z") return Reference::normal;
  throw InvalidParameter("unknown reference '" + name + "'");
}

Eigen::VectorXd contrast_tate(const FixedEffectsSpec& spec) {
  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(spec.params());
  if (spec.treatment == Treatment::immediate) {
    contrast(spec.treatment_col(1)) = 1.0;
    return contrast;
  }
  for (int e = 1; e <= spec.periods - 1; ++e) contrast(spec.treatment_col(e)) = 1.0 / (spec.periods - 1);
  return contrast;
}

Eigen::VectorXd contrast_lte(const FixedEffectsSpec& spec) {
  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(spec.params());
  contrast(spec.treatment_col(spec.treatment == Treatment::immediate ? 1 : spec.periods - 1)) = 1.0;
  return contrast;
}

Eigen::VectorXd contrast_exposure(const FixedEffectsSpec& spec, int exposure) {
  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(spec.params());
  contrast(spec.treatment_col(exposure)) = 1.0;
  return contrast;
}

double critical_value(Reference reference, double level, int df) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("confidence level must lie in (0,1)");
  const double tail = 0.5 * (1.0 + level);
  if (reference == Reference::normal) return normal_quantile(tail);
  if (df < 1) throw InvalidParameter("t reference needs at least one degree of freedom");
  return student_t_quantile(tail, df);
}

EstimandRow infer(const FittedModel& fitted, const VarianceEstimate& variance, const Eigen::VectorXd& contrast,
                  Reference reference, double level, std::optional<double> truth, const std::string& estimand,
                  std::optional<double> critical) {
  if (contrast.size() != fitted.beta.size()) throw InvalidParameter("contrast length does not match parameters");
  EstimandRow row;
  row.estimand = estimand;
  row.estimator = variance.estimator;
  row.reference = reference;
  row.df = fitted.num_clusters() - 2;
  row.estimate = contrast.dot(fitted.beta);

  double qform = contrast.dot(variance.cov * contrast);
  const double scale = variance.cov.cwiseAbs().maxCoeff() * contrast.squaredNorm();
  if (qform < -1e-12 * std::max(scale, 1e-300))
    throw NegativeVariance("contrast variance is negative; estimator flagged upstream");
  if (qform <= 0.0) {
    qform = 0.0;
    row.degenerate = true;
  }
  row.se = std::sqrt(qform);

  const double q = critical ? *critical : critical_value(reference, level, row.df);
  row.lo = row.estimate - q * row.se;
  row.hi = row.estimate + q * row.se;
  if (truth) row.covered = (*truth >= row.lo && *truth <= row.hi);
  return row;
}

}  // namespace swcrt
