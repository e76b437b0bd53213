#pragma once

#include <Eigen/Core>
#include <vector>

#include "swcrt/correlation.hpp"
#include "swcrt/dataset.hpp"
#include "swcrt/design.hpp"

namespace swcrt {

// Rows sharing a cluster-period (and trial count) carry identical fixed- and
// random-effect rows, so per-cluster quantities are accumulated over such
// cells instead of raw rows. All downstream algebra on this grouping is exact
// for the corresponding row-level model.
struct CellInfo {
  int period = 1;
  int exposure = 0;
  int treat = 0;
  int trials = 1;  // trials per row in this cell
  int nrows = 0;
  double ysum = 0.0;
  double ysq = 0.0;

  double trials_total() const { return static_cast<double>(trials) * nrows; }
};

struct ClusterCache {
  int id = 0;
  std::vector<CellInfo> cells;
  Eigen::MatrixXd x;           // m x p fixed-effect rows, one per cell
  Eigen::MatrixXd z;           // m x q working random-effect loadings
  Eigen::VectorXd nrows;       // m, rows per cell
  Eigen::VectorXd row_weight;  // m, marginal diagonal per row: sigma^2, or 1/(trials*mu(1-mu))
  Eigen::VectorXd resid_sum;   // m, per-cell sums of linearized residuals
  Eigen::MatrixXd w;           // m x m inverse of the cell-level working covariance
  Eigen::VectorXd eta, mu;     // m, fitted linear predictor / mean per cell (binary)
  Eigen::VectorXd mode;        // q, random-effect mode (binary) or BLUP (continuous)

  // Row-level copies for audits and dense linearization.
  Eigen::VectorXd row_y;
  Eigen::VectorXi row_trials;
  Eigen::VectorXi row_cell;

  int rows() const { return static_cast<int>(row_y.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
};

struct FittedModel {
  Family family = Family::continuous;
  WorkingStructure working;
  Eigen::VectorXd beta;
  std::vector<double> variances;  // per working variance group (u [, v][, t])
  double sigma2 = 0.0;            // residual variance (continuous only)
  Eigen::MatrixXd bread;          // sum of X_i' V_i^-1 X_i
  std::vector<ClusterCache> clusters;
  int obs = 0;     // total rows
  int params = 0;  // fixed-effect count
  bool converged = false;
  bool boundary = false;
  bool quasi_separation = false;
  int iterations = 0;
  double objective = 0.0;

  int num_clusters() const { return static_cast<int>(clusters.size()); }
};

// Group a dataset into per-cluster cells for the given fixed-effects layout
// and working structure. Throws FamilyMismatch on gaussian rows with trials>1.
std::vector<ClusterCache> group_cells(const Dataset& data, const FixedEffectsSpec& spec,
                                      const WorkingStructure& working);

// Cluster built from raw rows (arbitrary design matrix, exchangeable-style
// loading); rows with identical covariates are merged into one cell.
ClusterCache make_raw_cluster(int id, const Eigen::MatrixXd& x_rows, const Eigen::VectorXd& y,
                              const WorkingStructure& working);

// W = (Z R Z' + diag(d/n))^-1 at given effect variances (diagonal R).
Eigen::MatrixXd cell_working_inverse(const ClusterCache& cluster, const Eigen::VectorXd& cov_diag);

// Row-level linearization of one cluster: derivative diagonal, conditional
// variance, dense working covariance, pseudo-response and residual.
struct LinearizedCluster {
  Eigen::MatrixXd x;
  Eigen::VectorXd delta;
  Eigen::VectorXd cond_var;
  Eigen::MatrixXd working_cov;
  Eigen::VectorXd pseudo;
  Eigen::VectorXd resid;
};

LinearizedCluster linearize(const FittedModel& model, int cluster_index);
std::vector<LinearizedCluster> linearize(const FittedModel& model);

}  // namespace swcrt
