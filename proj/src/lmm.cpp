#include "swcrt/lmm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "swcrt/errors.hpp"
#include "swcrt/optimize.hpp"

namespace swcrt {

namespace {

constexpr double kLogRatioLo = -13.0;
constexpr double kLogRatioHi = 7.0;
constexpr double kZeroVariance = 1e-10;

struct RemlEvaluation {
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
  double loglik = 0.0;  // restricted log-likelihood
};

struct RemlProblem {
  const std::vector<ClusterCache>* clusters = nullptr;
  const WorkingStructure* working = nullptr;
  int params = 0;
  int total_rows = 0;

  // Restricted log-likelihood profiled over beta and sigma^2, at variance
  // ratios lambda_g = sigma_g^2 / sigma^2.
  RemlEvaluation evaluate(const std::vector<double>& ratios) const {
    const int p = params;
    Eigen::MatrixXd axx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd axy = Eigen::VectorXd::Zero(p);
    double yvy = 0.0;
    double logdet_v = 0.0;
    const Eigen::VectorXd ratio_diag = working->cov_diagonal(ratios);
    for (const ClusterCache& cluster : *clusters) {
      const int m = cluster.num_cells();
      Eigen::MatrixXd a = cluster.z * ratio_diag.asDiagonal() * cluster.z.transpose();
      a.diagonal() += cluster.nrows.cwiseInverse();
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() != Eigen::Success) throw SingularDesign("working covariance not positive definite");
      Eigen::VectorXd ybar(m);
      for (int c = 0; c < m; ++c) {
        const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
        ybar(c) = cell.ysum / cell.nrows;
        yvy += cell.ysq - cell.ysum * cell.ysum / cell.nrows;
        logdet_v += std::log(static_cast<double>(cell.nrows));
      }
      logdet_v += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const Eigen::MatrixXd wx = llt.solve(cluster.x);
      const Eigen::VectorXd wy = llt.solve(ybar);
      axx.noalias() += cluster.x.transpose() * wx;
      axy.noalias() += cluster.x.transpose() * wy;
      yvy += ybar.dot(wy);
    }
    Eigen::LLT<Eigen::MatrixXd> axx_llt(axx);
    if (axx_llt.info() != Eigen::Success) throw SingularDesign("rank-deficient fixed-effects design");
    RemlEvaluation eval;
    eval.beta = axx_llt.solve(axy);
    const double q_form = std::max(yvy - axy.dot(eval.beta), 1e-300);
    const double dof = total_rows - p;
    eval.sigma2 = q_form / dof;
    const double logdet_axx = 2.0 * axx_llt.matrixLLT().diagonal().array().log().sum();
    eval.loglik = -0.5 * (dof * (1.0 + std::log(2.0 * std::numbers::pi * eval.sigma2)) + logdet_v + logdet_axx);
    return eval;
  }
};

std::vector<double> ratios_from_log_sd(const Eigen::VectorXd& theta) {
  std::vector<double> ratios(static_cast<size_t>(theta.size()));
  for (Eigen::Index g = 0; g < theta.size(); ++g) ratios[static_cast<size_t>(g)] = std::exp(2.0 * theta(g));
  return ratios;
}

Eigen::VectorXd newton_polish(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                              double lo, double hi, int& iterations) {
  const int n = static_cast<int>(x.size());
  const double h = 1e-5;
  double fx = f(x);
  for (int it = 0; it < 6; ++it) {
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    std::vector<double> up(static_cast<size_t>(n)), dn(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
      Eigen::VectorXd probe = x;
      probe(a) = x(a) + h;
      up[static_cast<size_t>(a)] = f(probe);
      probe(a) = x(a) - h;
      dn[static_cast<size_t>(a)] = f(probe);
      grad(a) = (up[static_cast<size_t>(a)] - dn[static_cast<size_t>(a)]) / (2.0 * h);
      hess(a, a) = (up[static_cast<size_t>(a)] - 2.0 * fx + dn[static_cast<size_t>(a)]) / (h * h);
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        Eigen::VectorXd probe = x;
        probe(a) += h;
        probe(b) += h;
        const double fab = f(probe);
        hess(a, b) = hess(b, a) =
            (fab - up[static_cast<size_t>(a)] - up[static_cast<size_t>(b)] + fx) / (h * h);
      }
    ++iterations;
    const Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) break;  // flat or boundary region
    Eigen::VectorXd step = llt.solve(grad);
    const double step_norm = step.cwiseAbs().maxCoeff();
    if (!std::isfinite(step_norm)) break;
    if (step_norm > 0.5) step *= 0.5 / step_norm;
    Eigen::VectorXd candidate = (x - step).cwiseMax(lo).cwiseMin(hi);
    const double fc = f(candidate);
    if (!(fc <= fx + 1e-12 * (1.0 + std::fabs(fx)))) break;
    const bool converged = (candidate - x).cwiseAbs().maxCoeff() < 1e-11;
    x = candidate;
    fx = fc;
    if (converged) break;
  }
  return x;
}

}  // namespace

FittedModel fit_lmm_cells(std::vector<ClusterCache> clusters, const WorkingStructure& working, int params,
                          const FitOptions& options) {
  if (clusters.size() < 2) throw InvalidParameter("mixed-model fit needs at least two clusters");

  RemlProblem problem;
  problem.clusters = &clusters;
  problem.working = &working;
  problem.params = params;
  for (const ClusterCache& cluster : clusters) problem.total_rows += cluster.rows();
  if (problem.total_rows <= params) throw SingularDesign("fewer observations than fixed-effect parameters");

  const auto objective = [&](const Eigen::VectorXd& t) { return -problem.evaluate(ratios_from_log_sd(t)).loglik; };

  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
  if (working.groups == 1) {
    const auto scalar_objective = [&](double t) { return objective(Eigen::VectorXd::Constant(1, t)); };
    const ScalarMinimum opt = golden_section_minimize(scalar_objective, kLogRatioLo, kLogRatioHi,
                                                      options.tolerance, options.max_iterations);
    theta = Eigen::VectorXd::Constant(1, opt.x);
    iterations = opt.iterations;
    converged = opt.converged;
  } else {
    const VectorMinimum opt = nelder_mead_minimize(objective, Eigen::VectorXd::Constant(working.groups, -1.0), 1.0,
                                                   options.tolerance, options.max_iterations);
    theta = opt.x;
    iterations = opt.iterations;
    converged = opt.converged;
  }

  // A search over function values alone locates the optimum only to about the
  // square root of the evaluation noise; a few damped Newton steps on numeric
  // derivatives pin it down far enough for downstream 1e-8 invariances.
  theta = newton_polish(objective, theta, kLogRatioLo, kLogRatioHi, iterations);

  std::vector<double> ratios = ratios_from_log_sd(theta);
  const RemlEvaluation eval = problem.evaluate(ratios);

  FittedModel model;
  model.family = Family::continuous;
  model.working = working;
  model.beta = eval.beta;
  model.sigma2 = eval.sigma2;
  model.params = params;
  model.obs = problem.total_rows;
  model.iterations = iterations;
  model.converged = converged;
  model.objective = eval.loglik;
  model.variances.resize(static_cast<size_t>(working.groups));
  for (int g = 0; g < working.groups; ++g) {
    double var = ratios[static_cast<size_t>(g)] * eval.sigma2;
    if (ratios[static_cast<size_t>(g)] < kZeroVariance) {
      var = 0.0;
      model.boundary = true;
    }
    model.variances[static_cast<size_t>(g)] = var;
  }

  const Eigen::VectorXd cov_diag = working.cov_diagonal(model.variances);
  model.bread = Eigen::MatrixXd::Zero(params, params);
  for (ClusterCache& cluster : clusters) {
    cluster.row_weight = Eigen::VectorXd::Constant(cluster.num_cells(), model.sigma2);
    cluster.w = cell_working_inverse(cluster, cov_diag);
    cluster.resid_sum.resize(cluster.num_cells());
    for (int c = 0; c < cluster.num_cells(); ++c) {
      const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
      cluster.resid_sum(c) = cell.ysum - cell.nrows * cluster.x.row(c).dot(model.beta);
    }
    model.bread.noalias() += cluster.x.transpose() * cluster.w * cluster.x;
    // BLUP of the cluster's random effects.
    cluster.mode = cov_diag.asDiagonal() * cluster.z.transpose() *
                   (cluster.w * (cluster.resid_sum.array() / cluster.nrows.array()).matrix());
  }
  model.clusters = std::move(clusters);
  return model;
}

double reml_profile_loglik(const std::vector<ClusterCache>& clusters, const WorkingStructure& working, int params,
                           const Eigen::VectorXd& log_sd_ratios) {
  RemlProblem problem;
  problem.clusters = &clusters;
  problem.working = &working;
  problem.params = params;
  for (const ClusterCache& cluster : clusters) problem.total_rows += cluster.rows();
  return problem.evaluate(ratios_from_log_sd(log_sd_ratios)).loglik;
}

FittedModel fit_lmm(const Dataset& data, const FixedEffectsSpec& spec, RandomKind working,
                    const FitOptions& options) {
  if (data.family != Family::continuous) throw FamilyMismatch("fit_lmm expects a continuous outcome");
  if (working != RandomKind::exch && working != RandomKind::ne)
    throw InvalidParameter("continuous working structure must be exch or ne");
  const WorkingStructure w = make_working_structure(working, spec.periods);
  return fit_lmm_cells(group_cells(data, spec, w), w, spec.params(), options);
}

FittedModel gls_with_known_variance(std::vector<ClusterCache> clusters, const WorkingStructure& working,
                                    int params, const std::vector<double>& group_variances, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidParameter("residual variance must be positive");
  const Eigen::VectorXd cov_diag = working.cov_diagonal(group_variances);
  Eigen::MatrixXd axx = Eigen::MatrixXd::Zero(params, params);
  Eigen::VectorXd axy = Eigen::VectorXd::Zero(params);
  int total_rows = 0;
  for (ClusterCache& cluster : clusters) {
    cluster.row_weight = Eigen::VectorXd::Constant(cluster.num_cells(), sigma2);
    cluster.w = cell_working_inverse(cluster, cov_diag);
    total_rows += cluster.rows();
    Eigen::VectorXd ybar(cluster.num_cells());
    for (int c = 0; c < cluster.num_cells(); ++c)
      ybar(c) = cluster.cells[static_cast<size_t>(c)].ysum / cluster.cells[static_cast<size_t>(c)].nrows;
    axx.noalias() += cluster.x.transpose() * cluster.w * cluster.x;
    axy.noalias() += cluster.x.transpose() * cluster.w * ybar;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(axx);
  if (llt.info() != Eigen::Success) throw SingularDesign("rank-deficient fixed-effects design");

  FittedModel model;
  model.family = Family::continuous;
  model.working = working;
  model.beta = llt.solve(axy);
  model.sigma2 = sigma2;
  model.variances = group_variances;
  model.params = params;
  model.obs = total_rows;
  model.converged = true;
  model.bread = axx;
  for (ClusterCache& cluster : clusters) {
    cluster.resid_sum.resize(cluster.num_cells());
    for (int c = 0; c < cluster.num_cells(); ++c) {
      const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
      cluster.resid_sum(c) = cell.ysum - cell.nrows * cluster.x.row(c).dot(model.beta);
    }
    cluster.mode = cov_diag.asDiagonal() * cluster.z.transpose() *
                   (cluster.w * (cluster.resid_sum.array() / cluster.nrows.array()).matrix());
  }
  model.clusters = std::move(clusters);
  return model;
}

}  // namespace swcrt
