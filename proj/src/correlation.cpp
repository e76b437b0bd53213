#include "swcrt/correlation.hpp"

#include <cmath>
#include <string>

#include "swcrt/errors.hpp"

namespace swcrt {

void RandomStructure::validate() const {
  if (sigma_u < 0 || sigma_v < 0 || sigma_gamma < 0 || sigma_t < 0)
    throw InvalidParameter("random-effect standard deviations must be nonnegative");
  if (kind == RandomKind::ed || kind == RandomKind::ed_ri) {
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidParameter("decay rho must lie in [0,1)");
  }
}

const char* random_kind_name(RandomKind kind) {
  switch (kind) {
    case RandomKind::exch: return "exch";
    case RandomKind::ne: return "ne";
    case RandomKind::ne_ri: return "ne_ri";
    case RandomKind::ed: return "ed";
    case RandomKind::ed_ri: return "ed_ri";
  }
  return "?";
}

RandomKind random_kind_from_name(const std::string& name) {
  if (name == "exch") return RandomKind::exch;
  if (name == "ne") return RandomKind::ne;
  if (name == "ne_ri") return RandomKind::ne_ri;
  if (name == "ed") return RandomKind::ed;
  if (name == "ed_ri") return RandomKind::ed_ri;
  throw InvalidParameter("unknown random structure '" + name + "'");
}

Eigen::MatrixXd ar1_matrix(double rho, int periods) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidParameter("ar1_matrix: rho must lie in [0,1)");
  if (periods < 1) throw InvalidParameter("ar1_matrix: need at least one period");
  Eigen::MatrixXd z(periods, periods);
  for (int a = 0; a < periods; ++a)
    for (int b = 0; b < periods; ++b) z(a, b) = std::pow(rho, std::abs(a - b));
  return z;
}

Eigen::RowVectorXd RandomEffectModel::loading(int period, int treat) const {
  if (period < 1 || period > periods) throw OutOfRange("period out of range");
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(dim());
  switch (kind) {
    case RandomKind::exch:
      z(0) = 1.0;
      break;
    case RandomKind::ne:
      z(0) = 1.0;
      z(period) = 1.0;
      break;
    case RandomKind::ne_ri:
      z(0) = 1.0;
      z(period) = 1.0;
      z(periods + 1) = treat ? 1.0 : 0.0;
      break;
    case RandomKind::ed:
      z(period - 1) = 1.0;
      break;
    case RandomKind::ed_ri:
      z(period - 1) = 1.0;
      z(periods) = treat ? 1.0 : 0.0;
      break;
  }
  return z;
}

RandomEffectModel random_effect_covariance(const RandomStructure& structure, const Design& design, int cluster) {
  structure.validate();
  if (cluster < 1 || cluster > design.clusters) throw OutOfRange("cluster id out of range");
  const int j = design.periods;
  RandomEffectModel model;
  model.kind = structure.kind;
  model.periods = j;
  switch (structure.kind) {
    case RandomKind::exch:
      model.cov = Eigen::MatrixXd::Constant(1, 1, structure.sigma_u * structure.sigma_u);
      break;
    case RandomKind::ne: {
      model.cov = Eigen::MatrixXd::Zero(1 + j, 1 + j);
      model.cov(0, 0) = structure.sigma_u * structure.sigma_u;
      model.cov.diagonal().tail(j).setConstant(structure.sigma_v * structure.sigma_v);
      break;
    }
    case RandomKind::ne_ri: {
      model.cov = Eigen::MatrixXd::Zero(2 + j, 2 + j);
      model.cov(0, 0) = structure.sigma_u * structure.sigma_u;
      model.cov.diagonal().segment(1, j).setConstant(structure.sigma_v * structure.sigma_v);
      model.cov(1 + j, 1 + j) = structure.sigma_t * structure.sigma_t;
      break;
    }
    case RandomKind::ed:
      model.cov = structure.sigma_gamma * structure.sigma_gamma * ar1_matrix(structure.rho, j);
      break;
    case RandomKind::ed_ri: {
      model.cov = Eigen::MatrixXd::Zero(j + 1, j + 1);
      model.cov.topLeftCorner(j, j) = structure.sigma_gamma * structure.sigma_gamma * ar1_matrix(structure.rho, j);
      model.cov(j, j) = structure.sigma_t * structure.sigma_t;
      break;
    }
  }
  return model;
}

double IccSummary::bp_icc(int lag) const {
  if (lag < 0) throw InvalidParameter("lag must be nonnegative");
  if (lag == 0) return wp_icc;
  if (kind == RandomKind::ed) return wp_icc * std::pow(rho, lag);
  return wp_icc * cac;
}

IccSummary icc_summary(const RandomStructure& structure, double residual_var) {
  structure.validate();
  if (!(residual_var > 0.0)) throw InvalidParameter("residual variance must be positive");
  if (structure.has_random_intervention())
    throw Unsupported("ICC summary for random-intervention structures depends on treatment arm");
  IccSummary icc;
  icc.kind = structure.kind;
  icc.residual_var = residual_var;
  switch (structure.kind) {
    case RandomKind::exch: {
      const double su2 = structure.sigma_u * structure.sigma_u;
      icc.wp_icc = su2 / (su2 + residual_var);
      icc.cac = 1.0;
      break;
    }
    case RandomKind::ne: {
      const double su2 = structure.sigma_u * structure.sigma_u;
      const double sv2 = structure.sigma_v * structure.sigma_v;
      const double denom = su2 + sv2 + residual_var;
      icc.wp_icc = (su2 + sv2) / denom;
      icc.cac = icc.wp_icc > 0.0 ? (su2 / denom) / icc.wp_icc : 1.0;
      break;
    }
    case RandomKind::ed: {
      const double sg2 = structure.sigma_gamma * structure.sigma_gamma;
      icc.wp_icc = sg2 / (sg2 + residual_var);
      icc.rho = structure.rho;
      icc.cac = structure.rho;
      break;
    }
    default:
      throw Unsupported("ICC summary undefined for this structure");
  }
  return icc;
}

Eigen::RowVectorXd WorkingStructure::loading(int period, int treat) const {
  if (period < 1 || period > periods) throw OutOfRange("period out of range");
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(dim);
  z(0) = 1.0;
  if (kind == RandomKind::ne || kind == RandomKind::ne_ri) z(period) = 1.0;
  if (kind == RandomKind::ne_ri) z(periods + 1) = treat ? 1.0 : 0.0;
  return z;
}

Eigen::VectorXd WorkingStructure::cov_diagonal(const std::vector<double>& group_variances) const {
  if (static_cast<int>(group_variances.size()) != groups)
    throw InvalidParameter("wrong number of variance parameters");
  Eigen::VectorXd diag(dim);
  for (int k = 0; k < dim; ++k) diag(k) = group_variances[static_cast<size_t>(group[static_cast<size_t>(k)])];
  return diag;
}

WorkingStructure make_working_structure(RandomKind kind, int periods) {
  WorkingStructure w;
  w.kind = kind;
  w.periods = periods;
  switch (kind) {
    case RandomKind::exch:
      w.dim = 1;
      w.groups = 1;
      w.group = {0};
      break;
    case RandomKind::ne:
      w.dim = 1 + periods;
      w.groups = 2;
      w.group.assign(static_cast<size_t>(w.dim), 1);
      w.group[0] = 0;
      break;
    case RandomKind::ne_ri:
      w.dim = 2 + periods;
      w.groups = 3;
      w.group.assign(static_cast<size_t>(w.dim), 1);
      w.group[0] = 0;
      w.group[static_cast<size_t>(w.dim) - 1] = 2;
      break;
    default:
      throw InvalidParameter("exponential-decay structures are not supported as working models");
  }
  return w;
}

}  // namespace swcrt
