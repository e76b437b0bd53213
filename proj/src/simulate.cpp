#include "swcrt/simulate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>

#include "swcrt/errors.hpp"

namespace swcrt {

std::vector<double> effect_profile_linear(int periods) {
  if (periods < 3) throw InvalidParameter("effect profile needs at least 3 periods");
  std::vector<double> deltas(static_cast<size_t>(periods) - 1);
  for (int e = 1; e <= periods - 1; ++e)
    deltas[static_cast<size_t>(e) - 1] = static_cast<double>(e) / (periods - 1);
  return deltas;
}

void ScenarioConfig::validate() const {
  if (clusters < 2) throw InvalidParameter("need at least two clusters");
  if (periods < 3) throw InvalidParameter("need at least three periods");
  if (cluster_period_size < 1) throw InvalidParameter("cluster-period size must be positive");
  if (replications < 1) throw InvalidParameter("replications must be positive");
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("confidence level must lie in (0,1)");
  generating.validate();
  if (!period_effects.empty() && static_cast<int>(period_effects.size()) != periods)
    throw InvalidParameter("period effects must list one value per period");
  if (family == Family::continuous) {
    if (static_cast<int>(deltas.size()) != periods - 1)
      throw InvalidParameter("continuous scenarios need one exposure effect per exposure time");
    if (!(sigma > 0.0)) throw InvalidParameter("residual standard deviation must be positive");
    if (generating.kind != RandomKind::ed && generating.kind != RandomKind::ed_ri)
      throw FamilyMismatch("continuous generator uses an exponential-decay structure");
  } else {
    if (!(baseline_prob > 0.0 && baseline_prob < 1.0))
      throw InvalidParameter("baseline probability must lie in (0,1)");
    if (generating.kind == RandomKind::ed || generating.kind == RandomKind::ed_ri)
      throw FamilyMismatch("binary generator uses exch, ne or ne_ri structures");
  }
  for (RandomKind kind : working)
    if (kind == RandomKind::ed || kind == RandomKind::ed_ri)
      throw InvalidParameter("exponential-decay structures are not supported as working models");
}

namespace {

double period_effect(const ScenarioConfig& scenario, int period) {
  if (scenario.period_effects.empty()) return 0.0;
  return scenario.period_effects[static_cast<size_t>(period) - 1];
}

}  // namespace

Dataset simulate_continuous(const ScenarioConfig& scenario, RngStream& stream) {
  scenario.validate();
  if (scenario.family != Family::continuous) throw FamilyMismatch("scenario is not continuous");
  const Design design = scenario.design();
  const int J = scenario.periods;
  const int K = scenario.cluster_period_size;

  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(J, J);
  if (scenario.generating.sigma_gamma > 0.0) {
    const Eigen::MatrixXd cov =
        scenario.generating.sigma_gamma * scenario.generating.sigma_gamma * ar1_matrix(scenario.generating.rho, J);
    chol = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  }

  Dataset data;
  data.family = Family::continuous;
  data.rows.reserve(static_cast<size_t>(design.clusters) * J * K);
  Eigen::VectorXd noise(J);
  for (int i = 1; i <= design.clusters; ++i) {
    for (int j = 0; j < J; ++j) noise(j) = stream.next_normal();
    const Eigen::VectorXd gamma = chol * noise;
    const double t_i = scenario.generating.kind == RandomKind::ed_ri
                           ? scenario.generating.sigma_t * stream.next_normal()
                           : 0.0;
    for (int j = 1; j <= J; ++j) {
      const int e = exposure_time(design, i, j);
      const int treat = e >= 1 ? 1 : 0;
      double mean = scenario.mu + period_effect(scenario, j) + gamma(j - 1) + t_i * treat;
      if (e >= 1) mean += scenario.deltas[static_cast<size_t>(e) - 1];
      for (int k = 1; k <= K; ++k) {
        Observation row;
        row.cluster = i;
        row.period = j;
        row.individual = k;
        row.exposure = e;
        row.treat = treat;
        row.y = mean + scenario.sigma * stream.next_normal();
        data.rows.push_back(row);
      }
    }
  }
  return data;
}

Dataset simulate_binary(const ScenarioConfig& scenario, RngStream& stream) {
  scenario.validate();
  if (scenario.family != Family::binary) throw FamilyMismatch("scenario is not binary");
  const Design design = scenario.design();
  const int J = scenario.periods;
  const int K = scenario.cluster_period_size;
  const double base = std::log(scenario.baseline_prob / (1.0 - scenario.baseline_prob));
  const RandomKind kind = scenario.generating.kind;

  Dataset data;
  data.family = Family::binary;
  data.rows.reserve(static_cast<size_t>(design.clusters) * J * K);
  for (int i = 1; i <= design.clusters; ++i) {
    const double u_i = scenario.generating.sigma_u * stream.next_normal();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(J);
    if (kind == RandomKind::ne || kind == RandomKind::ne_ri)
      for (int j = 0; j < J; ++j) v(j) = scenario.generating.sigma_v * stream.next_normal();
    const double t_i = kind == RandomKind::ne_ri ? scenario.generating.sigma_t * stream.next_normal() : 0.0;
    for (int j = 1; j <= J; ++j) {
      const int e = exposure_time(design, i, j);
      const int treat = e >= 1 ? 1 : 0;
      const double eta =
          base + period_effect(scenario, j) + scenario.log_or * treat + u_i + v(j - 1) + t_i * treat;
      const double prob = 1.0 / (1.0 + std::exp(-eta));
      for (int k = 1; k <= K; ++k) {
        Observation row;
        row.cluster = i;
        row.period = j;
        row.individual = k;
        row.exposure = e;
        row.treat = treat;
        row.y = stream.next_uniform() < prob ? 1.0 : 0.0;
        data.rows.push_back(row);
      }
    }
  }
  return data;
}

Dataset simulate_dataset(const ScenarioConfig& scenario, RngStream& stream) {
  return scenario.family == Family::continuous ? simulate_continuous(scenario, stream)
                                               : simulate_binary(scenario, stream);
}

std::pair<double, double> true_estimands(const ScenarioConfig& scenario) {
  if (scenario.family == Family::binary) return {scenario.log_or, scenario.log_or};
  const double tate =
      std::accumulate(scenario.deltas.begin(), scenario.deltas.end(), 0.0) / static_cast<double>(scenario.deltas.size());
  return {tate, scenario.deltas.back()};
}

}  // namespace swcrt
