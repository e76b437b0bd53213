#include "swcrt/model.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <map>
#include <tuple>

#include "swcrt/errors.hpp"

namespace swcrt {

namespace {

void finalize_rows(ClusterCache& cluster, const std::vector<double>& y_rows, const std::vector<int>& trials_rows,
                   const std::vector<int>& cell_rows) {
  const auto n = static_cast<Eigen::Index>(y_rows.size());
  cluster.row_y.resize(n);
  cluster.row_trials.resize(n);
  cluster.row_cell.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    cluster.row_y(r) = y_rows[static_cast<size_t>(r)];
    cluster.row_trials(r) = trials_rows[static_cast<size_t>(r)];
    cluster.row_cell(r) = cell_rows[static_cast<size_t>(r)];
  }
  cluster.nrows.resize(cluster.num_cells());
  for (int c = 0; c < cluster.num_cells(); ++c) cluster.nrows(c) = cluster.cells[static_cast<size_t>(c)].nrows;
}

}  // namespace

std::vector<ClusterCache> group_cells(const Dataset& data, const FixedEffectsSpec& spec,
                                      const WorkingStructure& working) {
  if (data.rows.empty()) throw EmptyInput("dataset has no rows");
  if (working.periods != spec.periods) throw InvalidParameter("working structure and spec disagree on periods");

  // cluster id -> (period, trials) -> cell index
  std::map<int, std::map<std::pair<int, int>, int>> index;
  std::map<int, ClusterCache> by_cluster;
  std::map<int, std::vector<double>> y_rows;
  std::map<int, std::vector<int>> trials_rows, cell_rows;

  for (const Observation& row : data.rows) {
    if (row.trials < 1) throw InvalidParameter("trials must be >= 1");
    if (data.family == Family::continuous && row.trials != 1)
      throw FamilyMismatch("continuous outcomes cannot carry a trials count");
    ClusterCache& cluster = by_cluster[row.cluster];
    cluster.id = row.cluster;
    auto& cells = index[row.cluster];
    const auto key = std::make_pair(row.period, row.trials);
    auto found = cells.find(key);
    int cell_id;
    if (found == cells.end()) {
      cell_id = static_cast<int>(cluster.cells.size());
      cells.emplace(key, cell_id);
      CellInfo cell;
      cell.period = row.period;
      cell.exposure = row.exposure;
      cell.treat = row.treat;
      cell.trials = row.trials;
      cluster.cells.push_back(cell);
    } else {
      cell_id = found->second;
      const CellInfo& cell = cluster.cells[static_cast<size_t>(cell_id)];
      if (cell.exposure != row.exposure || cell.treat != row.treat)
        throw ConsistencyError("rows of one cluster-period disagree on exposure or treatment");
    }
    CellInfo& cell = cluster.cells[static_cast<size_t>(cell_id)];
    cell.nrows += 1;
    cell.ysum += row.y;
    cell.ysq += row.y * row.y;
    y_rows[row.cluster].push_back(row.y);
    trials_rows[row.cluster].push_back(row.trials);
    cell_rows[row.cluster].push_back(cell_id);
  }

  std::vector<ClusterCache> out;
  out.reserve(by_cluster.size());
  for (auto& [id, cluster] : by_cluster) {
    const int m = cluster.num_cells();
    cluster.x.resize(m, spec.params());
    cluster.z.resize(m, working.dim);
    for (int c = 0; c < m; ++c) {
      const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
      cluster.x.row(c) = design_row_for(spec, cell.period, cell.exposure);
      cluster.z.row(c) = working.loading(cell.period, cell.treat);
    }
    finalize_rows(cluster, y_rows[id], trials_rows[id], cell_rows[id]);
    out.push_back(std::move(cluster));
  }
  return out;
}

ClusterCache make_raw_cluster(int id, const Eigen::MatrixXd& x_rows, const Eigen::VectorXd& y,
                              const WorkingStructure& working) {
  if (x_rows.rows() != y.size()) throw InvalidParameter("design rows and outcomes disagree in length");
  ClusterCache cluster;
  cluster.id = id;
  std::vector<double> y_rows;
  std::vector<int> trials_rows, cell_rows;
  std::vector<Eigen::RowVectorXd> cell_x;
  for (Eigen::Index r = 0; r < x_rows.rows(); ++r) {
    int cell_id = -1;
    for (size_t c = 0; c < cell_x.size(); ++c)
      if ((cell_x[c] - x_rows.row(r)).cwiseAbs().maxCoeff() == 0.0) {
        cell_id = static_cast<int>(c);
        break;
      }
    if (cell_id < 0) {
      cell_id = static_cast<int>(cell_x.size());
      cell_x.push_back(x_rows.row(r));
      CellInfo cell;
      cluster.cells.push_back(cell);
    }
    CellInfo& cell = cluster.cells[static_cast<size_t>(cell_id)];
    cell.nrows += 1;
    cell.ysum += y(r);
    cell.ysq += y(r) * y(r);
    y_rows.push_back(y(r));
    trials_rows.push_back(1);
    cell_rows.push_back(cell_id);
  }
  const int m = cluster.num_cells();
  cluster.x.resize(m, x_rows.cols());
  cluster.z.resize(m, working.dim);
  for (int c = 0; c < m; ++c) {
    cluster.x.row(c) = cell_x[static_cast<size_t>(c)];
    cluster.z.row(c) = working.loading(1, 0);
  }
  finalize_rows(cluster, y_rows, trials_rows, cell_rows);
  return cluster;
}

Eigen::MatrixXd cell_working_inverse(const ClusterCache& cluster, const Eigen::VectorXd& cov_diag) {
  const int m = cluster.num_cells();
  Eigen::MatrixXd a = cluster.z * cov_diag.asDiagonal() * cluster.z.transpose();
  a.diagonal() += (cluster.row_weight.array() / cluster.nrows.array()).matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw SingularDesign("cell-level working covariance is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(m, m));
}

LinearizedCluster linearize(const FittedModel& model, int cluster_index) {
  if (cluster_index < 0 || cluster_index >= model.num_clusters()) throw OutOfRange("cluster index out of range");
  const ClusterCache& cluster = model.clusters[static_cast<size_t>(cluster_index)];
  const int n = cluster.rows();
  LinearizedCluster lin;
  lin.x.resize(n, model.params);
  lin.delta.resize(n);
  lin.cond_var.resize(n);
  lin.pseudo.resize(n);
  lin.resid.resize(n);
  Eigen::MatrixXd z_rows(n, model.working.dim);
  const Eigen::VectorXd cov_diag = model.working.cov_diagonal(model.variances);
  for (int r = 0; r < n; ++r) {
    const int c = cluster.row_cell(r);
    const CellInfo& cell = cluster.cells[static_cast<size_t>(c)];
    lin.x.row(r) = cluster.x.row(c);
    z_rows.row(r) = cluster.z.row(c);
    const double y = cluster.row_y(r);
    if (model.family == Family::continuous) {
      lin.delta(r) = 1.0;
      lin.cond_var(r) = model.sigma2;
      lin.pseudo(r) = y;
      lin.resid(r) = y - cluster.x.row(c).dot(model.beta);
    } else {
      const double mu = cluster.mu(c);
      if (mu < 1e-10 || mu > 1.0 - 1e-10)
        throw DegenerateWeight("fitted probability within 1e-10 of the boundary");
      const double t = cell.trials;
      const double w = t * mu * (1.0 - mu);  // count scale: mean t*mu
      lin.delta(r) = w;
      lin.cond_var(r) = w;
      lin.pseudo(r) = (y - t * mu) / w + cluster.eta(c);
      lin.resid(r) = (y - t * mu) / w + cluster.z.row(c).dot(cluster.mode);
    }
  }
  lin.working_cov = z_rows * cov_diag.asDiagonal() * z_rows.transpose();
  lin.working_cov.diagonal() += (lin.delta.array().inverse().square() * lin.cond_var.array()).matrix();
  return lin;
}

std::vector<LinearizedCluster> linearize(const FittedModel& model) {
  std::vector<LinearizedCluster> out;
  out.reserve(static_cast<size_t>(model.num_clusters()));
  for (int i = 0; i < model.num_clusters(); ++i) out.push_back(linearize(model, i));
  return out;
}

}  // namespace swcrt
