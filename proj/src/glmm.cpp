#include "swcrt/glmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "swcrt/errors.hpp"
#include "swcrt/optimize.hpp"

namespace swcrt {

namespace {

constexpr double kZeroVariance = 1e-8;

double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return 0.0;
  return std::log1p(std::exp(x));
}

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ModeResult {
  Eigen::VectorXd b;
  double joint = 0.0;    // conditional log-likelihood plus Gaussian penalty at the mode
  double laplace = 0.0;  // joint minus half log-determinant correction
  bool ok = false;
};

// Conditional mode of one cluster's random effects by damped Newton.
// Dimensions with zero variance are pinned at zero.
ModeResult cluster_mode(const ClusterCache& cluster, const Eigen::VectorXd& xbeta,
                        const Eigen::VectorXd& var_diag, Eigen::VectorXd b, int max_iter) {
  const int q = static_cast<int>(var_diag.size());
  const int m = cluster.num_cells();
  std::vector<int> active;
  for (int k = 0; k < q; ++k)
    if (var_diag(k) > 0.0) active.push_back(k);
  const int qa = static_cast<int>(active.size());
  for (int k = 0; k < q; ++k)
    if (var_diag(k) <= 0.0) b(k) = 0.0;

  Eigen::VectorXd mtot(m), s(m);
  for (int c = 0; c < m; ++c) {
    mtot(c) = cluster.cells[static_cast<size_t>(c)].trials_total();
    s(c) = cluster.cells[static_cast<size_t>(c)].ysum;
  }

  const auto joint_at = [&](const Eigen::VectorXd& bb) {
    double value = 0.0;
    for (int c = 0; c < m; ++c) {
      const double eta = xbeta(c) + cluster.z.row(c).dot(bb);
      value += s(c) * eta - mtot(c) * softplus(eta);
    }
    for (int k : active) value -= 0.5 * bb(k) * bb(k) / var_diag(k);
    return value;
  };

  ModeResult result;
  double joint = joint_at(b);
  const double tol = 1e-11 * (1.0 + mtot.sum());
  bool converged = qa == 0;
  for (int it = 0; it < max_iter && !converged; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(qa);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(qa, qa);
    for (int c = 0; c < m; ++c) {
      const double eta = xbeta(c) + cluster.z.row(c).dot(b);
      const double mu = expit(eta);
      const double w = mtot(c) * mu * (1.0 - mu);
      const double r = s(c) - mtot(c) * mu;
      for (int a = 0; a < qa; ++a) {
        const double za = cluster.z(c, active[static_cast<size_t>(a)]);
        if (za == 0.0) continue;
        grad(a) += za * r;
        for (int bcol = a; bcol < qa; ++bcol)
          hess(a, bcol) += w * za * cluster.z(c, active[static_cast<size_t>(bcol)]);
      }
    }
    for (int a = 0; a < qa; ++a) {
      grad(a) -= b(active[static_cast<size_t>(a)]) / var_diag(active[static_cast<size_t>(a)]);
      hess(a, a) += 1.0 / var_diag(active[static_cast<size_t>(a)]);
      for (int bcol = 0; bcol < a; ++bcol) hess(a, bcol) = hess(bcol, a);
    }
    if (grad.cwiseAbs().maxCoeff() <= tol) {
      converged = true;
      break;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) return result;
    const Eigen::VectorXd step = llt.solve(grad);
    double scale = 1.0;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd trial = b;
      for (int a = 0; a < qa; ++a) trial(active[static_cast<size_t>(a)]) += scale * step(a);
      const double trial_joint = joint_at(trial);
      if (trial_joint >= joint - 1e-12 * (1.0 + std::fabs(joint))) {
        b = trial;
        joint = trial_joint;
        break;
      }
      scale *= 0.5;
    }
  }
  if (!converged) return result;

  // Laplace correction: -1/2 log|I + R^{1/2} Z' W Z R^{1/2}| over active dims.
  double correction = 0.0;
  if (qa > 0) {
    Eigen::MatrixXd mw = Eigen::MatrixXd::Zero(qa, qa);
    for (int c = 0; c < m; ++c) {
      const double eta = xbeta(c) + cluster.z.row(c).dot(b);
      const double mu = expit(eta);
      const double w = mtot(c) * mu * (1.0 - mu);
      for (int a = 0; a < qa; ++a) {
        const double za = cluster.z(c, active[static_cast<size_t>(a)]);
        if (za == 0.0) continue;
        for (int bcol = a; bcol < qa; ++bcol)
          mw(a, bcol) += w * za * cluster.z(c, active[static_cast<size_t>(bcol)]);
      }
    }
    for (int a = 0; a < qa; ++a) {
      const double sd_a = std::sqrt(var_diag(active[static_cast<size_t>(a)]));
      for (int bcol = a; bcol < qa; ++bcol) {
        mw(a, bcol) *= sd_a * std::sqrt(var_diag(active[static_cast<size_t>(bcol)]));
        mw(bcol, a) = mw(a, bcol);
      }
      mw(a, a) += 1.0;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(mw);
    if (llt.info() != Eigen::Success) return result;
    correction = llt.matrixLLT().diagonal().array().log().sum();
  }

  result.b = b;
  result.joint = joint;
  result.laplace = joint - correction;
  result.ok = true;
  return result;
}

struct LaplaceProblem {
  const std::vector<ClusterCache>* clusters = nullptr;
  const WorkingStructure* working = nullptr;
  int params = 0;
  int max_inner = 100;
  double binom_constant = 0.0;
  mutable std::vector<Eigen::VectorXd> warm;
  mutable bool inner_failure = false;

  double negative_loglik(const Eigen::VectorXd& phi) const {
    const Eigen::VectorXd beta = phi.head(params);
    std::vector<double> variances(static_cast<size_t>(working->groups));
    for (int g = 0; g < working->groups; ++g) {
      const double zeta = phi(params + g);
      variances[static_cast<size_t>(g)] = std::exp(2.0 * std::max(zeta, -17.0));
    }
    const Eigen::VectorXd var_diag = working->cov_diagonal(variances);
    double loglik = binom_constant;
    for (size_t i = 0; i < clusters->size(); ++i) {
      const ClusterCache& cluster = (*clusters)[i];
      const Eigen::VectorXd xbeta = cluster.x * beta;
      const ModeResult mode = cluster_mode(cluster, xbeta, var_diag, warm[i], max_inner);
      if (!mode.ok || !std::isfinite(mode.laplace)) {
        inner_failure = true;
        return 1e100;
      }
      warm[i] = mode.b;
      loglik += mode.laplace;
    }
    return -loglik;
  }
};

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

Eigen::VectorXd pooled_logistic(const std::vector<ClusterCache>& clusters, int params) {
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(params, params);
  for (const ClusterCache& cluster : clusters)
    xtx.noalias() += cluster.x.transpose() * cluster.nrows.asDiagonal() * cluster.x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()))
    throw SingularDesign("rank-deficient fixed-effects design");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(params);
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(params, params);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(params);
    for (const ClusterCache& cluster : clusters) {
      const Eigen::VectorXd xbeta = cluster.x * beta;
      for (int c = 0; c < cluster.num_cells(); ++c) {
        const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
        const double mu = expit(xbeta(c));
        const double w = cell.trials_total() * mu * (1.0 - mu);
        score.noalias() += cluster.x.row(c).transpose() * (cell.ysum - cell.trials_total() * mu);
        info.noalias() += w * cluster.x.row(c).transpose() * cluster.x.row(c);
      }
    }
    info.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = info.ldlt().solve(score);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return beta;
}

FittedModel fit_glmm_cells(std::vector<ClusterCache> clusters, const WorkingStructure& working, int params,
                           const GlmmOptions& options) {
  if (clusters.size() < 2) throw InvalidParameter("mixed-model fit needs at least two clusters");

  LaplaceProblem problem;
  problem.clusters = &clusters;
  problem.working = &working;
  problem.params = params;
  problem.max_inner = options.max_inner;
  problem.warm.assign(clusters.size(), Eigen::VectorXd::Zero(working.dim));
  int total_rows = 0;
  for (const ClusterCache& cluster : clusters) {
    total_rows += cluster.rows();
    for (int r = 0; r < cluster.rows(); ++r)
      if (cluster.row_trials(r) > 1)
        problem.binom_constant += log_choose(cluster.row_trials(r), cluster.row_y(r));
  }

  Eigen::VectorXd phi(params + working.groups);
  phi.head(params) = pooled_logistic(clusters, params);
  phi.tail(working.groups).setConstant(std::log(0.3));

  BfgsOptions bfgs;
  bfgs.max_iterations = options.max_outer;
  bfgs.grad_tolerance = options.grad_tolerance;
  bfgs.gradient_h = 1e-5;
  const BfgsResult opt = bfgs_minimize([&](const Eigen::VectorXd& x) { return problem.negative_loglik(x); }, phi, bfgs);

  FittedModel model;
  model.family = Family::binary;
  model.working = working;
  model.params = params;
  model.obs = total_rows;
  model.beta = opt.x.head(params);
  model.iterations = opt.iterations;
  model.objective = -opt.f;
  model.converged = opt.converged && !problem.inner_failure;

  model.variances.resize(static_cast<size_t>(working.groups));
  for (int g = 0; g < working.groups; ++g) {
    double var = std::exp(2.0 * std::max(opt.x(params + g), -17.0));
    if (var < kZeroVariance) {
      var = 0.0;
      model.boundary = true;
    }
    model.variances[static_cast<size_t>(g)] = var;
  }

  const Eigen::VectorXd var_diag = working.cov_diagonal(model.variances);
  model.bread = Eigen::MatrixXd::Zero(params, params);
  for (ClusterCache& cluster : clusters) {
    const Eigen::VectorXd xbeta = cluster.x * model.beta;
    const ModeResult mode = cluster_mode(cluster, xbeta, var_diag, Eigen::VectorXd::Zero(working.dim),
                                         2 * options.max_inner);
    if (!mode.ok) {
      model.quasi_separation = true;
      model.converged = false;
    }
    cluster.mode = mode.ok ? mode.b : Eigen::VectorXd::Zero(working.dim);
    const int m = cluster.num_cells();
    cluster.eta.resize(m);
    cluster.mu.resize(m);
    cluster.row_weight.resize(m);
    cluster.resid_sum.resize(m);
    for (int c = 0; c < m; ++c) {
      const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
      const double eta = xbeta(c) + cluster.z.row(c).dot(cluster.mode);
      const double mu = expit(eta);
      const double w = mu * (1.0 - mu);
      cluster.eta(c) = eta;
      cluster.mu(c) = mu;
      if (std::fabs(eta) > options.separation_eta) model.quasi_separation = true;
      cluster.row_weight(c) = 1.0 / (cell.trials * std::max(w, 1e-300));
      cluster.resid_sum(c) = (cell.ysum - cell.trials_total() * mu) / (cell.trials * std::max(w, 1e-300)) +
                             cell.nrows * cluster.z.row(c).dot(cluster.mode);
    }
    cluster.w = cell_working_inverse(cluster, var_diag);
    model.bread.noalias() += cluster.x.transpose() * cluster.w * cluster.x;
  }
  model.clusters = std::move(clusters);
  return model;
}

FittedModel fit_glmm_logistic(const Dataset& data, const FixedEffectsSpec& spec, RandomKind working,
                              const GlmmOptions& options) {
  if (data.family != Family::binary) throw FamilyMismatch("fit_glmm_logistic expects a binary outcome");
  const WorkingStructure w = make_working_structure(working, spec.periods);
  return fit_glmm_cells(group_cells(data, spec, w), w, spec.params(), options);
}

}  // namespace swcrt
