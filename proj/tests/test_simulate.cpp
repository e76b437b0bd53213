#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "swcrt/errors.hpp"
#include "swcrt/simulate.hpp"

using namespace swcrt;

namespace {

ScenarioConfig continuous_c1(int clusters, int periods, int size) {
  ScenarioConfig s;
  s.id = "C-I";
  s.clusters = clusters;
  s.periods = periods;
  s.cluster_period_size = size;
  s.family = Family::continuous;
  s.generating.kind = RandomKind::ed_ri;
  s.generating.sigma_gamma = 0.10;
  s.generating.rho = 0.8;
  s.generating.sigma_t = 0.21;
  s.sigma = 1.0;
  s.deltas = effect_profile_linear(periods);
  s.replications = 1;
  s.working = {RandomKind::exch};
  s.estimators = {Estimator::classic};
  s.references = {Reference::t_small_sample};
  return s;
}

ScenarioConfig binary_b1(int clusters, int periods, int size, double p0) {
  ScenarioConfig s;
  s.id = "B-I";
  s.clusters = clusters;
  s.periods = periods;
  s.cluster_period_size = size;
  s.family = Family::binary;
  s.generating.kind = RandomKind::exch;
  s.generating.sigma_u = 0.42;
  s.baseline_prob = p0;
  s.log_or = 0.25;
  s.replications = 1;
  s.working = {RandomKind::exch};
  s.estimators = {Estimator::classic};
  s.references = {Reference::t_small_sample};
  return s;
}

}  // namespace

TEST_CASE("linear effect profile") {
  const std::vector<double> j5 = effect_profile_linear(5);
  CHECK(j5 == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  const std::vector<double> j9 = effect_profile_linear(9);
  CHECK(j9.size() == 8);
  CHECK(j9.front() == doctest::Approx(0.125));
  CHECK(j9.back() == doctest::Approx(1.0));
  const std::vector<double> j3 = effect_profile_linear(3);
  CHECK(j3 == std::vector<double>{0.5, 1.0});
}

TEST_CASE("true estimands") {
  ScenarioConfig c5 = continuous_c1(8, 5, 10);
  CHECK(true_estimands(c5).first == doctest::Approx(0.625));
  CHECK(true_estimands(c5).second == doctest::Approx(1.0));
  ScenarioConfig c9 = continuous_c1(8, 9, 10);
  CHECK(true_estimands(c9).first == doctest::Approx(0.5625));
  CHECK(true_estimands(c9).second == doctest::Approx(1.0));
  ScenarioConfig b = binary_b1(8, 5, 10, 0.2);
  CHECK(true_estimands(b).first == doctest::Approx(0.25));
  CHECK(true_estimands(b).second == doctest::Approx(0.25));
}

TEST_CASE("dataset shape, exposure bookkeeping and determinism") {
  const ScenarioConfig scenario = continuous_c1(8, 5, 10);
  RngStream a(99, scenario.id, 4);
  RngStream b(99, scenario.id, 4);
  const Dataset d1 = simulate_continuous(scenario, a);
  const Dataset d2 = simulate_continuous(scenario, b);
  CHECK(d1.rows.size() == 8u * 5u * 10u);
  const Design design = scenario.design();
  for (size_t r = 0; r < d1.rows.size(); ++r) {
    CHECK(d1.rows[r].exposure == exposure_time(design, d1.rows[r].cluster, d1.rows[r].period));
    CHECK(d1.rows[r].y == d2.rows[r].y);  // byte-identical draws
  }
  RngStream c(99, scenario.id, 5);
  const Dataset d3 = simulate_continuous(scenario, c);
  CHECK(d1.rows[0].y != d3.rows[0].y);
}

TEST_CASE("noiseless continuous generator returns the mean structure") {
  ScenarioConfig scenario = continuous_c1(4, 5, 2);
  scenario.generating.sigma_gamma = 0.0;
  scenario.generating.sigma_t = 0.0;
  scenario.sigma = 1e-12;
  scenario.mu = 0.7;
  RngStream stream(1, scenario.id, 0);
  const Dataset data = simulate_continuous(scenario, stream);
  for (const Observation& row : data.rows) {
    const double expected = 0.7 + (row.exposure >= 1 ? scenario.deltas[static_cast<size_t>(row.exposure) - 1] : 0.0);
    CHECK(row.y == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("continuous generator moments match the analytic values") {
  const ScenarioConfig scenario = continuous_c1(8, 5, 10);
  // control-observation variance = sigma_gamma^2 + sigma^2 = 1.01
  double sum = 0.0, sumsq = 0.0;
  long n_control = 0;
  // lag-2 covariance of control cluster-period means = sigma_gamma^2 rho^2
  double cross = 0.0;
  long n_pairs = 0;
  const Design design = scenario.design();
  const int periods = scenario.periods;
  const int size = scenario.cluster_period_size;
  for (int rep = 0; rep < 16000; ++rep) {
    RngStream stream(555, scenario.id, static_cast<std::uint64_t>(rep));
    const Dataset data = simulate_continuous(scenario, stream);
    std::vector<double> cell_mean(static_cast<size_t>(scenario.clusters * periods), 0.0);
    for (const Observation& row : data.rows) {
      if (row.exposure == 0 && n_control < 100000) {
        sum += row.y;
        sumsq += row.y * row.y;
        ++n_control;
      }
      cell_mean[static_cast<size_t>((row.cluster - 1) * periods + row.period - 1)] += row.y / size;
    }
    for (int i = 1; i <= scenario.clusters; ++i) {
      const int crossover = design.crossover_of(i);
      for (int j = 1; j + 2 <= crossover - 1; ++j) {
        cross += cell_mean[static_cast<size_t>((i - 1) * periods + j - 1)] *
                 cell_mean[static_cast<size_t>((i - 1) * periods + j + 1)];
        ++n_pairs;
      }
    }
  }
  const double mean = sum / n_control;
  const double var = sumsq / n_control - mean * mean;
  CHECK(n_control == 100000);
  CHECK(var == doctest::Approx(1.01).epsilon(0.02));
  CHECK(n_pairs >= 90000);
  CHECK(cross / n_pairs == doctest::Approx(0.0064).epsilon(0.156));  // +/- 0.001 absolute
  CHECK(std::fabs(cross / n_pairs - 0.0064) < 0.001);
}

TEST_CASE("degenerate binary generator is a fair coin at p0 = 0.5") {
  ScenarioConfig scenario = binary_b1(8, 5, 10, 0.5);
  scenario.generating.sigma_u = 0.0;
  double events = 0.0;
  long n = 0;
  for (int rep = 0; rep < 500 && n < 100000; ++rep) {
    RngStream stream(7, scenario.id, static_cast<std::uint64_t>(rep));
    const Dataset data = simulate_binary(scenario, stream);
    for (const Observation& row : data.rows)
      if (row.treat == 0 && n < 100000) {
        events += row.y;
        ++n;
      }
  }
  CHECK(n == 100000);
  CHECK(events / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(events / n - 0.5) < 0.005);
}

TEST_CASE("marginal control probability under a random intercept exceeds the conditional one") {
  const ScenarioConfig scenario = binary_b1(8, 5, 10, 0.2);
  const double oracle = oracles::expit_normal_mean(std::log(0.2 / 0.8), 0.42);
  CHECK(oracle == doctest::Approx(0.2081317988).epsilon(1e-6));
  double events = 0.0;
  long n = 0;
  for (int rep = 0; rep < 800 && n < 100000; ++rep) {
    RngStream stream(31, scenario.id, static_cast<std::uint64_t>(rep));
    const Dataset data = simulate_binary(scenario, stream);
    for (const Observation& row : data.rows)
      if (row.treat == 0 && n < 100000) {
        events += row.y;
        ++n;
      }
  }
  const double observed = events / n;
  CHECK(observed > 0.2);
  CHECK(observed == doctest::Approx(oracle).epsilon(0.03));
  CHECK(std::fabs(observed - oracle) < 0.006);
}

TEST_CASE("family and structure mismatches are rejected") {
  ScenarioConfig continuous = continuous_c1(8, 5, 10);
  RngStream stream(1, "x", 0);
  CHECK_THROWS_AS(simulate_binary(continuous, stream), FamilyMismatch);

  ScenarioConfig bad = continuous_c1(8, 5, 10);
  bad.generating.kind = RandomKind::exch;  // continuous generator needs a decay structure
  CHECK_THROWS_AS(simulate_continuous(bad, stream), FamilyMismatch);

  ScenarioConfig binary = binary_b1(8, 5, 10, 0.2);
  binary.generating.kind = RandomKind::ed;
  binary.generating.rho = 0.5;
  CHECK_THROWS_AS(simulate_binary(binary, stream), FamilyMismatch);
}
