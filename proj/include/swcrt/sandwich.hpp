#pragma once

#include <optional>
#include <string>

#include "swcrt/model.hpp"

namespace swcrt {

enum class Estimator { model, classic, kc, md, mbn };

const char* estimator_name(Estimator estimator);
Estimator estimator_from_name(const std::string& name);

struct MbnParams {
  double r = 1.0;
  double d = 2.0;
};

struct MbnDetail {
  double c = 0.0;
  double delta = 0.0;
  double phi = 0.0;
  int p_star = 0;
};

struct VarianceEstimate {
  Estimator estimator = Estimator::model;
  Eigen::MatrixXd cov;
  int obs = 0;
  int params = 0;
  int clusters = 0;
  double asymmetry = 0.0;       // max |V - V'| before symmetrization
  double min_eigenvalue = 0.0;  // of the symmetrized matrix
  bool psd = true;
  std::optional<MbnDetail> mbn;
};

// Model-based covariance: inverse of the bread matrix.
VarianceEstimate model_based(const FittedModel& fitted);

// Cluster-robust sandwich without finite-sample correction.
VarianceEstimate classic_sandwich(const FittedModel& fitted);

// Kauermann-Carroll: residuals premultiplied by (I - H_i')^{-1/2}.
VarianceEstimate kauermann_carroll(const FittedModel& fitted);

// Mancl-DeRouen: residuals premultiplied by (I - H_i')^{-1}.
VarianceEstimate mancl_derouen(const FittedModel& fitted);

// Morel-Bokossa-Neerchal: scaled classic sandwich plus an additive term.
VarianceEstimate morel_bokossa_neerchal(const FittedModel& fitted, const MbnParams& params = {});

VarianceEstimate compute_estimator(const FittedModel& fitted, Estimator estimator, const MbnParams& params = {});

// Per-cluster meat factor X_i' V_i^{-1} F_i e_i (classic, kc or md
// adjustment), exposed for audits.
Eigen::VectorXd cluster_meat_factor(const ClusterCache& cluster, const Eigen::MatrixXd& bread_inverse,
                                    Estimator estimator);

}  // namespace swcrt
