#include "swcrt/harness.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

#include "swcrt/dist.hpp"
#include "swcrt/errors.hpp"
#include "swcrt/glmm.hpp"
#include "swcrt/lmm.hpp"

namespace swcrt {

double bias_percent(const std::vector<double>& estimates, double truth) {
  if (estimates.empty()) throw EmptyInput("bias_percent: no estimates");
  if (truth == 0.0) throw ZeroTruth("bias_percent: truth is zero");
  double mean = 0.0;
  for (double v : estimates) mean += v;
  mean /= static_cast<double>(estimates.size());
  return 100.0 * (mean - truth) / std::fabs(truth);
}

std::pair<double, double> coverage_percent(const std::vector<bool>& covered) {
  if (covered.empty()) throw EmptyInput("coverage_percent: no indicators");
  double hits = 0.0;
  for (bool c : covered) hits += c ? 1.0 : 0.0;
  const double n = static_cast<double>(covered.size());
  const double p = hits / n;
  return {100.0 * p, 100.0 * std::sqrt(p * (1.0 - p) / n)};
}

namespace {

int count_longest_cell_events(const Dataset& data, int periods) {
  int events = 0;
  for (const Observation& row : data.rows)
    if (row.exposure == periods - 1) events += static_cast<int>(row.y);
  return events;
}

struct CriticalValues {
  double value(Reference reference, double level, int df) { return critical_value(reference, level, df); }
};

}  // namespace

ReplicationRecord run_replication(const ScenarioConfig& scenario, RandomKind working, int replication) {
  ReplicationRecord record;
  record.replication = replication;

  RngStream stream(scenario.seed, scenario.id, static_cast<std::uint64_t>(replication));
  const Dataset data = simulate_dataset(scenario, stream);
  if (scenario.family == Family::binary)
    record.events_longest_cell = count_longest_cell_events(data, scenario.periods);

  const FixedEffectsSpec spec{scenario.fitted_treatment, scenario.periods};
  FittedModel fitted;
  try {
    fitted = scenario.family == Family::continuous ? fit_lmm(data, spec, working)
                                                   : fit_glmm_logistic(data, spec, working);
  } catch (const Error& err) {
    record.fit_failed = true;
    record.failure = err.what();
    return record;
  }
  record.fit_converged = fitted.converged;
  record.boundary = fitted.boundary;
  record.quasi_separation = fitted.quasi_separation;
  record.objective = fitted.objective;
  record.iterations = fitted.iterations;

  const auto [tate_true, lte_true] = true_estimands(scenario);
  const Eigen::VectorXd tate = contrast_tate(spec);
  const Eigen::VectorXd lte = contrast_lte(spec);

  std::optional<VarianceEstimate> classic_est;
  std::optional<VarianceEstimate> mbn_est;
  std::optional<VarianceEstimate> model_est;
  for (Estimator estimator : scenario.estimators) {
    std::optional<VarianceEstimate> variance;
    bool failed = false;
    try {
      variance = compute_estimator(fitted, estimator, scenario.mbn);
    } catch (const Error&) {
      failed = true;
    }
    if (variance) {
      if (estimator == Estimator::classic) classic_est = variance;
      if (estimator == Estimator::mbn) mbn_est = variance;
      if (estimator == Estimator::model) model_est = variance;
    }
    for (const auto& [name, contrast, truth] :
         {std::make_tuple("tate", &tate, tate_true), std::make_tuple("lte", &lte, lte_true)}) {
      for (Reference reference : scenario.references) {
        RecordRow row;
        row.estimand = name;
        row.estimator = estimator;
        row.reference = reference;
        row.adjustment_failed = failed;
        if (variance) {
          try {
            const EstimandRow inference =
                infer(fitted, *variance, *contrast, reference, scenario.level, truth, name);
            row.estimate = inference.estimate;
            row.se = inference.se;
            row.covered = inference.covered.value_or(false);
            row.usable = std::isfinite(row.estimate) && std::isfinite(row.se) && row.se > 0.0;
            if (estimator == Estimator::mbn) row.mbn = variance->mbn;
          } catch (const Error&) {
            row.usable = false;
          }
        }
        record.rows.push_back(std::move(row));
      }
    }
  }

  // Decomposition check: the additive-correction estimator minus the scaled
  // classic sandwich must equal delta*phi*M^-1 and be positive semidefinite.
  if (mbn_est && mbn_est->mbn) {
    try {
      const Eigen::MatrixXd bread_inv = model_est ? model_est->cov : model_based(fitted).cov;
      if (!classic_est) classic_est = classic_sandwich(fitted);
      const Eigen::MatrixXd diff = mbn_est->cov - mbn_est->mbn->c * classic_est->cov;
      const Eigen::MatrixXd expected = mbn_est->mbn->delta * mbn_est->mbn->phi * bread_inv;
      const double scale = std::max(1e-300, mbn_est->cov.cwiseAbs().maxCoeff());
      record.mbn_identity_dev = (diff - expected).cwiseAbs().maxCoeff() / scale;
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (diff + diff.transpose()));
      const double top = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      record.mbn_identity_psd = eig.eigenvalues().minCoeff() >= -1e-10 * top;
    } catch (const Error&) {
      record.mbn_identity_psd = false;
    }
  }
  return record;
}

namespace {

struct CellKey {
  std::string estimand;
  Estimator estimator;
  Reference reference;
};

void append_summaries(std::vector<SummaryRow>& out, const ScenarioConfig& scenario, const WorkingRun& run,
                      double truth_tate, double truth_lte, bool converged_only) {
  for (const char* estimand : {"tate", "lte"}) {
    for (Estimator estimator : scenario.estimators) {
      for (Reference reference : scenario.references) {
        std::vector<double> estimates;
        std::vector<bool> covered;
        for (const ReplicationRecord& record : run.records) {
          if (record.fit_failed) continue;
          if (converged_only && (!record.fit_converged || record.quasi_separation)) continue;
          for (const RecordRow& row : record.rows) {
            if (!row.usable || row.estimand != estimand || row.estimator != estimator ||
                row.reference != reference)
              continue;
            estimates.push_back(row.estimate);
            covered.push_back(row.covered);
          }
        }
        SummaryRow summary;
        summary.scenario = run.label + (converged_only ? "#converged" : "");
        summary.estimand = estimand;
        summary.estimator = estimator;
        summary.reference = reference;
        summary.n = static_cast<int>(estimates.size());
        summary.excluded = scenario.replications - summary.n;
        summary.converged_only = converged_only;
        if (!estimates.empty()) {
          const double truth = std::string(estimand) == "tate" ? truth_tate : truth_lte;
          double mean = 0.0;
          for (double v : estimates) mean += v;
          summary.mean_est = mean / static_cast<double>(estimates.size());
          summary.bias_pct = bias_percent(estimates, truth);
          const auto [pct, mc_se] = coverage_percent(covered);
          summary.coverage_pct = pct;
          summary.mc_se = mc_se;
        } else {
          summary.mean_est = summary.bias_pct = summary.coverage_pct = summary.mc_se =
              std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(summary));
      }
    }
  }
}

}  // namespace

std::vector<SparsityRow> sparsity_profile(const std::string& label, const ScenarioConfig& scenario,
                                          const std::vector<ReplicationRecord>& records) {
  const std::vector<std::pair<std::string, std::pair<int, int>>> bins = {
      {"0", {0, 0}}, {"1-2", {1, 2}}, {"3-5", {3, 5}}, {"6+", {6, std::numeric_limits<int>::max()}}};
  std::vector<SparsityRow> out;
  const Reference reference = scenario.references.front();
  for (const auto& [bin_label, range] : bins) {
    for (const char* estimand : {"tate", "lte"}) {
      for (Estimator estimator : scenario.estimators) {
        std::vector<double> ses;
        for (const ReplicationRecord& record : records) {
          if (record.fit_failed || record.events_longest_cell < range.first ||
              record.events_longest_cell > range.second)
            continue;
          for (const RecordRow& row : record.rows)
            if (row.usable && row.estimand == estimand && row.estimator == estimator &&
                row.reference == reference)
              ses.push_back(row.se);
        }
        SparsityRow row;
        row.scenario = label;
        row.bin = bin_label;
        row.estimand = estimand;
        row.estimator = estimator;
        row.n = static_cast<int>(ses.size());
        if (!ses.empty()) {
          row.se_median = sample_quantile(ses, 0.5);
          row.se_q25 = sample_quantile(ses, 0.25);
          row.se_q75 = sample_quantile(ses, 0.75);
        } else {
          row.se_median = row.se_q25 = row.se_q75 = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& scenario, int workers) {
  scenario.validate();
  if (scenario.working.empty()) throw InvalidParameter("no working structure configured");
  if (scenario.estimators.empty()) throw InvalidParameter("no estimators configured");
  if (scenario.references.empty()) throw InvalidParameter("no references configured");
  if (workers < 1) workers = 1;

  ScenarioResult result;
  result.truth = true_estimands(scenario);
  for (RandomKind working : scenario.working) {
    WorkingRun run;
    run.working = working;
    run.label = scenario.id;
    if (scenario.working.size() > 1) run.label += std::string(":") + random_kind_name(working);
    run.records.resize(static_cast<size_t>(scenario.replications));

    std::atomic<int> next{0};
    const auto worker_loop = [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= scenario.replications) break;
        run.records[static_cast<size_t>(r)] = run_replication(scenario, working, r);
      }
    };
    if (workers == 1) {
      worker_loop();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers) - 1);
      for (int t = 1; t < workers; ++t) pool.emplace_back(worker_loop);
      worker_loop();
      for (std::thread& t : pool) t.join();
    }

    for (const ReplicationRecord& record : run.records) {
      result.mbn_identity_max_dev = std::max(result.mbn_identity_max_dev, record.mbn_identity_dev);
      if (!record.mbn_identity_psd) result.mbn_identity_all_psd = false;
    }
    result.runs.push_back(std::move(run));
  }

  for (const WorkingRun& run : result.runs) {
    append_summaries(result.summary, scenario, run, result.truth.first, result.truth.second, false);
    append_summaries(result.summary, scenario, run, result.truth.first, result.truth.second, true);
  }
  result.sparsity_applicable = scenario.family == Family::binary;
  if (result.sparsity_applicable)
    for (const WorkingRun& run : result.runs) {
      auto rows = sparsity_profile(run.label, scenario, run.records);
      result.sparsity.insert(result.sparsity.end(), rows.begin(), rows.end());
    }
  return result;
}

}  // namespace swcrt
