#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swcrt/correlation.hpp"
#include "swcrt/dataset.hpp"
#include "swcrt/design.hpp"
#include "swcrt/inference.hpp"
#include "swcrt/sandwich.hpp"

namespace swcrt {

// One simulation scenario: design, data-generating process, fitted models,
// estimators and run protocol.
struct ScenarioConfig {
  std::string id = "scenario";
  int clusters = 0;
  int periods = 0;
  int cluster_period_size = 0;

  Family family = Family::continuous;
  RandomStructure generating;

  // Continuous outcome: mean structure and residual scale.
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<double> deltas;  // exposure effects, length J-1

  // Binary outcome: baseline probability and constant log odds ratio.
  double baseline_prob = 0.2;
  double log_or = 0.25;

  std::vector<double> period_effects;  // length J, first entry 0

  int replications = 2000;
  std::uint64_t seed = 0;

  Treatment fitted_treatment = Treatment::exposure_indicators;
  std::vector<RandomKind> working;  // working structures to fit
  std::vector<Estimator> estimators;
  std::vector<Reference> references;
  MbnParams mbn;
  double level = 0.95;

  void validate() const;
  Design design() const { return build_standard_design(clusters, periods, cluster_period_size); }
};

// Linear exposure-effect profile rising from 1/(J-1) to 1.
std::vector<double> effect_profile_linear(int periods);

}  // namespace swcrt
