#pragma once

#include <Eigen/Core>
#include <vector>

#include "swcrt/design.hpp"

namespace swcrt {

enum class RandomKind { exch, ne, ne_ri, ed, ed_ri };

// Random-effects structure. Each kind uses a subset of the fields:
//   exch   sigma_u
//   ne     sigma_u, sigma_v
//   ne_ri  sigma_u, sigma_v, sigma_t
//   ed     sigma_gamma, rho
//   ed_ri  sigma_gamma, rho, sigma_t
// The random intervention effect loads on the treatment indicator and is
// independent of the other effects.
struct RandomStructure {
  RandomKind kind = RandomKind::exch;
  double sigma_u = 0.0;
  double sigma_v = 0.0;
  double sigma_gamma = 0.0;
  double rho = 0.0;
  double sigma_t = 0.0;

  void validate() const;
  bool has_random_intervention() const { return kind == RandomKind::ne_ri || kind == RandomKind::ed_ri; }
};

const char* random_kind_name(RandomKind kind);
RandomKind random_kind_from_name(const std::string& name);

// AR(1) correlation matrix with entries rho^|j-j'|.
Eigen::MatrixXd ar1_matrix(double rho, int periods);

// Covariance of the stacked cluster-level random-effect vector together with
// the map from observations to effect loadings.
struct RandomEffectModel {
  RandomKind kind = RandomKind::exch;
  int periods = 0;
  Eigen::MatrixXd cov;  // q x q

  int dim() const { return static_cast<int>(cov.rows()); }
  // Loading row of an observation in `period` with treatment indicator `treat`.
  Eigen::RowVectorXd loading(int period, int treat) const;
};

RandomEffectModel random_effect_covariance(const RandomStructure& structure, const Design& design, int cluster);

// Intracluster correlation summaries on the residual_var scale (sigma^2 for
// continuous outcomes, pi^2/3 on the logit scale for binary ones).
struct IccSummary {
  RandomKind kind = RandomKind::exch;
  double wp_icc = 0.0;
  double cac = 1.0;
  double rho = 0.0;
  double residual_var = 1.0;

  double bp_icc(int lag) const;
};

IccSummary icc_summary(const RandomStructure& structure, double residual_var);

// Diagonal-covariance structures available on the fitting side (exch, ne,
// ne_ri). Effects are grouped by shared variance parameter: u, then the J
// cluster-period intercepts, then the random intervention effect.
struct WorkingStructure {
  RandomKind kind = RandomKind::exch;
  int periods = 0;
  int dim = 0;
  int groups = 0;
  std::vector<int> group;  // size dim, effect -> variance-parameter index

  Eigen::RowVectorXd loading(int period, int treat) const;
  Eigen::VectorXd cov_diagonal(const std::vector<double>& group_variances) const;
};

WorkingStructure make_working_structure(RandomKind kind, int periods);

}  // namespace swcrt
