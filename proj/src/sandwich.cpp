#include "swcrt/sandwich.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "swcrt/errors.hpp"

namespace swcrt {

const char* estimator_name(Estimator estimator) {
  switch (estimator) {
    case Estimator::model: return "model";
    case Estimator::classic: return "classic";
    case Estimator::kc: return "kc";
    case Estimator::md: return "md";
    case Estimator::mbn: return "mbn";
  }
  return "?";
}

Estimator estimator_from_name(const std::string& name) {
  if (name == "model") return Estimator::model;
  if (name == "classic") return Estimator::classic;
  if (name == "kc") return Estimator::kc;
  if (name == "md") return Estimator::md;
  if (name == "mbn") return Estimator::mbn;
  throw InvalidParameter("unknown estimator '" + name + "'");
}

namespace {

enum class Adjustment { none, inverse_sqrt, inverse };

Eigen::MatrixXd bread_inverse(const FittedModel& fitted) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fitted.bread);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw SingularBread("bread matrix is not positive definite");
  const Eigen::VectorXd d = ldlt.vectorD();
  if (d.minCoeff() <= 1e-13 * d.maxCoeff()) throw SingularBread("bread matrix is numerically singular");
  return ldlt.solve(Eigen::MatrixXd::Identity(fitted.params, fitted.params));
}

// Per-cluster meat factor X_i' V_i^{-1} F_i e_i, evaluated on cluster-period
// cells. Rows of a cell share the fixed- and random-effect rows and the
// marginal diagonal d, so with W = (Z R Z' + diag(d/n))^{-1}, N = diag(n),
// and r the per-cell residual sums,
//   X_i' V_i^{-1} e_i = X' W N^{-1} r,
// and the row-level adjustment F = f(I - H_i') contracts exactly to
//   X_i' V_i^{-1} F_i e_i = X' W N^{-1} f(I_m - T) r,  T = W X M^{-1} X'.
// The remaining eigenvalues of I - H_i' equal one, so existence checks reduce
// to the spectrum of I_m - T.
Eigen::VectorXd meat_factor(const ClusterCache& cluster, const Eigen::MatrixXd& bread_inv, Adjustment adjustment) {
  Eigen::VectorXd v = cluster.resid_sum;
  if (adjustment != Adjustment::none) {
    const int m = cluster.num_cells();
    const Eigen::MatrixXd t = cluster.w * (cluster.x * bread_inv * cluster.x.transpose());
    const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(m, m) - t;
    const Eigen::EigenSolver<Eigen::MatrixXd> eig(s);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (adjustment == Adjustment::inverse_sqrt) {
      if (eig.eigenvalues().real().minCoeff() <= 1e-12 * scale)
        throw AdjustmentFailure("I - H' has an eigenvalue with nonpositive real part; no real square root");
      const Eigen::MatrixXd root = s.sqrt();
      v = root.partialPivLu().solve(v);
    } else {
      if (eig.eigenvalues().cwiseAbs().minCoeff() <= 1e-12 * scale)
        throw AdjustmentFailure("I - H' is numerically singular");
      v = s.partialPivLu().solve(v);
    }
  }
  v.array() /= cluster.nrows.array();
  return cluster.x.transpose() * (cluster.w * v);
}

VarianceEstimate finalize(Estimator estimator, const FittedModel& fitted, Eigen::MatrixXd cov) {
  VarianceEstimate estimate;
  estimate.estimator = estimator;
  estimate.obs = fitted.obs;
  estimate.params = fitted.params;
  estimate.clusters = fitted.num_clusters();
  estimate.asymmetry = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  cov = 0.5 * (cov + cov.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  estimate.min_eigenvalue = eig.eigenvalues().minCoeff();
  const double top = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  estimate.psd = estimate.min_eigenvalue >= -1e-10 * top;
  estimate.cov = std::move(cov);
  return estimate;
}

Eigen::MatrixXd robust_covariance(const FittedModel& fitted, const Eigen::MatrixXd& bread_inv,
                                  Adjustment adjustment) {
  if (fitted.num_clusters() < 2) throw InvalidParameter("cluster-robust variance needs at least two clusters");
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(fitted.params, fitted.params);
  for (const ClusterCache& cluster : fitted.clusters) {
    const Eigen::VectorXd g = meat_factor(cluster, bread_inv, adjustment);
    meat.noalias() += g * g.transpose();
  }
  return bread_inv * meat * bread_inv;
}

}  // namespace

VarianceEstimate model_based(const FittedModel& fitted) {
  return finalize(Estimator::model, fitted, bread_inverse(fitted));
}

VarianceEstimate classic_sandwich(const FittedModel& fitted) {
  return finalize(Estimator::classic, fitted, robust_covariance(fitted, bread_inverse(fitted), Adjustment::none));
}

VarianceEstimate kauermann_carroll(const FittedModel& fitted) {
  return finalize(Estimator::kc, fitted, robust_covariance(fitted, bread_inverse(fitted), Adjustment::inverse_sqrt));
}

VarianceEstimate mancl_derouen(const FittedModel& fitted) {
  return finalize(Estimator::md, fitted, robust_covariance(fitted, bread_inverse(fitted), Adjustment::inverse));
}

VarianceEstimate morel_bokossa_neerchal(const FittedModel& fitted, const MbnParams& params) {
  if (!(params.r >= 0.0 && params.r <= 1.0)) throw InvalidParameter("mbn r must lie in [0,1]");
  if (!(params.d >= 1.0)) throw InvalidParameter("mbn d must be at least 1");
  const Eigen::MatrixXd bread_inv = bread_inverse(fitted);
  if (fitted.num_clusters() < 2) throw InvalidParameter("cluster-robust variance needs at least two clusters");

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(fitted.params, fitted.params);
  for (const ClusterCache& cluster : fitted.clusters) {
    const Eigen::VectorXd g = meat_factor(cluster, bread_inv, Adjustment::none);
    meat.noalias() += g * g.transpose();
  }
  const Eigen::MatrixXd classic_cov = bread_inv * meat * bread_inv;
  const Eigen::MatrixXd omega = bread_inv * meat;

  const double n = fitted.obs;
  const double p = fitted.params;
  const double i = fitted.num_clusters();
  MbnDetail detail;
  detail.c = ((n - 1.0) / (n - p)) * (i / (i - 1.0));
  if (i > p) {
    detail.p_star = fitted.params;
  } else {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(omega);
    const double top = svd.singularValues().maxCoeff();
    detail.p_star = static_cast<int>((svd.singularValues().array() > 1e-10 * top).count());
    if (detail.p_star == 0) detail.p_star = 1;
  }
  detail.phi = std::max(params.r, omega.trace() / detail.p_star);
  detail.delta = i > (params.d + 1.0) * p ? p / (i - p) : 1.0 / params.d;

  VarianceEstimate estimate =
      finalize(Estimator::mbn, fitted, detail.c * classic_cov + detail.delta * detail.phi * bread_inv);
  estimate.mbn = detail;
  return estimate;
}

Eigen::VectorXd cluster_meat_factor(const ClusterCache& cluster, const Eigen::MatrixXd& bread_inverse,
                                    Estimator estimator) {
  switch (estimator) {
    case Estimator::classic: return meat_factor(cluster, bread_inverse, Adjustment::none);
    case Estimator::kc: return meat_factor(cluster, bread_inverse, Adjustment::inverse_sqrt);
    case Estimator::md: return meat_factor(cluster, bread_inverse, Adjustment::inverse);
    default: throw InvalidParameter("meat factors exist for classic, kc and md only");
  }
}

VarianceEstimate compute_estimator(const FittedModel& fitted, Estimator estimator, const MbnParams& params) {
  switch (estimator) {
    case Estimator::model: return model_based(fitted);
    case Estimator::classic: return classic_sandwich(fitted);
    case Estimator::kc: return kauermann_carroll(fitted);
    case Estimator::md: return mancl_derouen(fitted);
    case Estimator::mbn: return morel_bokossa_neerchal(fitted, params);
  }
  throw InvalidParameter("unknown estimator");
}

}  // namespace swcrt
