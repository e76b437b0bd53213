#include <doctest.h>

#include <cmath>
#include <map>

#include "swcrt/cli.hpp"
#include "swcrt/errors.hpp"
#include "swcrt/harness.hpp"

using namespace swcrt;

namespace {

ScenarioConfig smoke_continuous() {
  ScenarioConfig s;
  s.id = "smoke-c";
  s.clusters = 8;
  s.periods = 5;
  s.cluster_period_size = 10;
  s.family = Family::continuous;
  s.generating.kind = RandomKind::ed_ri;
  s.generating.sigma_gamma = 0.10;
  s.generating.rho = 0.8;
  s.generating.sigma_t = 0.21;
  s.deltas = effect_profile_linear(5);
  s.replications = 5;
  s.seed = 321;
  s.working = {RandomKind::exch};
  s.estimators = {Estimator::model, Estimator::classic, Estimator::kc, Estimator::md, Estimator::mbn};
  s.references = {Reference::t_small_sample, Reference::normal};
  return s;
}

ScenarioConfig smoke_binary() {
  ScenarioConfig s;
  s.id = "smoke-b";
  s.clusters = 8;
  s.periods = 5;
  s.cluster_period_size = 10;
  s.family = Family::binary;
  s.generating.kind = RandomKind::exch;
  s.generating.sigma_u = 0.42;
  s.baseline_prob = 0.2;
  s.replications = 30;
  s.seed = 99;
  s.working = {RandomKind::exch};
  s.estimators = {Estimator::model, Estimator::classic, Estimator::kc, Estimator::md, Estimator::mbn};
  s.references = {Reference::t_small_sample, Reference::normal};
  return s;
}

const SummaryRow& find_row(const std::vector<SummaryRow>& rows, const std::string& estimand, Estimator estimator,
                           Reference reference, bool converged_only) {
  for (const SummaryRow& row : rows)
    if (row.estimand == estimand && row.estimator == estimator && row.reference == reference &&
        row.converged_only == converged_only)
      return row;
  throw std::runtime_error("summary row not found");
}

}  // namespace

TEST_CASE("bias and coverage aggregation") {
  CHECK(bias_percent({0.628, 0.628, 0.628}, 0.625) == doctest::Approx(0.48));
  CHECK(bias_percent({0.625}, 0.625) == doctest::Approx(0.0));
  CHECK_THROWS_AS(bias_percent({1.0}, 0.0), ZeroTruth);
  CHECK_THROWS_AS(bias_percent({}, 1.0), EmptyInput);

  std::vector<bool> covered(2000, true);
  for (int i = 0; i < 100; ++i) covered[static_cast<size_t>(i)] = false;
  const auto [pct, mc_se] = coverage_percent(covered);
  CHECK(pct == doctest::Approx(95.0));
  CHECK(mc_se == doctest::Approx(0.487).epsilon(1e-3));
  CHECK(coverage_percent(std::vector<bool>(10, true)).first == doctest::Approx(100.0));
  CHECK(coverage_percent(std::vector<bool>(10, true)).second == doctest::Approx(0.0));
  CHECK(coverage_percent(std::vector<bool>(10, false)).first == doctest::Approx(0.0));
  CHECK_THROWS_AS(coverage_percent({}), EmptyInput);
}

TEST_CASE("smoke scenario cardinality and content") {
  const ScenarioConfig scenario = smoke_continuous();
  const ScenarioResult result = run_scenario(scenario, 1);
  REQUIRE(result.runs.size() == 1);
  CHECK(result.runs[0].records.size() == 5);
  // 2 estimands x 5 estimators x 2 references per inclusion mode
  CHECK(result.summary.size() == 40);
  int all_mode = 0;
  for (const SummaryRow& row : result.summary) {
    if (!row.converged_only) ++all_mode;
    CHECK(row.n + row.excluded == scenario.replications);
  }
  CHECK(all_mode == 20);
  CHECK_FALSE(result.sparsity_applicable);
  CHECK(result.truth.first == doctest::Approx(0.625));
  CHECK(result.truth.second == doctest::Approx(1.0));
  for (const ReplicationRecord& record : result.runs[0].records) {
    CHECK(record.fit_converged);
    CHECK(record.rows.size() == 20);
    CHECK(record.events_longest_cell == -1);
  }
  // the point estimate is shared by all estimators within a replication
  const ReplicationRecord& first = result.runs[0].records[0];
  std::map<std::string, double> estimates;
  for (const RecordRow& row : first.rows) {
    if (!estimates.count(row.estimand)) estimates[row.estimand] = row.estimate;
    CHECK(row.estimate == doctest::Approx(estimates[row.estimand]).epsilon(1e-12));
  }
}

TEST_CASE("worker count never changes the output bytes") {
  const ScenarioConfig scenario = smoke_continuous();
  const ScenarioResult a = run_scenario(scenario, 1);
  const ScenarioResult b = run_scenario(scenario, 3);
  CHECK(summary_csv(a.summary) == summary_csv(b.summary));
  CHECK(records_csv(a.runs) == records_csv(b.runs));
}

TEST_CASE("t-reference coverage dominates normal coverage cell by cell") {
  const ScenarioResult result = run_scenario(smoke_binary(), 1);
  for (const char* estimand : {"tate", "lte"})
    for (Estimator estimator :
         {Estimator::model, Estimator::classic, Estimator::kc, Estimator::md, Estimator::mbn}) {
      const SummaryRow& t_row = find_row(result.summary, estimand, estimator, Reference::t_small_sample, false);
      const SummaryRow& z_row = find_row(result.summary, estimand, estimator, Reference::normal, false);
      if (t_row.n > 0 && z_row.n > 0) CHECK(t_row.coverage_pct >= z_row.coverage_pct);
    }
}

TEST_CASE("binary runs carry sparsity diagnostics and the mbn identity holds") {
  const ScenarioResult result = run_scenario(smoke_binary(), 1);
  CHECK(result.sparsity_applicable);
  CHECK_FALSE(result.sparsity.empty());
  // bins partition the replications for each (estimand, estimator)
  int tate_md_total = 0;
  for (const SparsityRow& row : result.sparsity)
    if (row.estimand == "tate" && row.estimator == Estimator::md) tate_md_total += row.n;
  int usable_md = 0;
  for (const ReplicationRecord& record : result.runs[0].records)
    for (const RecordRow& row : record.rows)
      if (row.estimand == "tate" && row.estimator == Estimator::md &&
          row.reference == Reference::t_small_sample && row.usable)
        ++usable_md;
  CHECK(tate_md_total == usable_md);
  CHECK(result.mbn_identity_max_dev < 1e-10);
  CHECK(result.mbn_identity_all_psd);
  for (const ReplicationRecord& record : result.runs[0].records) CHECK(record.events_longest_cell >= 0);
}

TEST_CASE("multiple working structures get labeled runs") {
  ScenarioConfig scenario = smoke_binary();
  scenario.replications = 3;
  scenario.working = {RandomKind::exch, RandomKind::ne};
  const ScenarioResult result = run_scenario(scenario, 1);
  REQUIRE(result.runs.size() == 2);
  CHECK(result.runs[0].label == "smoke-b:exch");
  CHECK(result.runs[1].label == "smoke-b:ne");
  CHECK(result.summary.size() == 80);
}

TEST_CASE("replication data is shared across working structures") {
  ScenarioConfig scenario = smoke_binary();
  scenario.replications = 2;
  const ReplicationRecord a = run_replication(scenario, RandomKind::exch, 1);
  const ReplicationRecord b = run_replication(scenario, RandomKind::ne, 1);
  CHECK(a.events_longest_cell == b.events_longest_cell);
}
