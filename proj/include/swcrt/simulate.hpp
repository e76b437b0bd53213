#pragma once

#include <utility>

#include "swcrt/rng.hpp"
#include "swcrt/scenario.hpp"

namespace swcrt {

// Draw one complete I x J x K dataset under the scenario's data-generating
// process. Deterministic given the stream.
Dataset simulate_continuous(const ScenarioConfig& scenario, RngStream& stream);
Dataset simulate_binary(const ScenarioConfig& scenario, RngStream& stream);
Dataset simulate_dataset(const ScenarioConfig& scenario, RngStream& stream);

// (time-averaged effect, longest-exposure effect) implied by the scenario.
std::pair<double, double> true_estimands(const ScenarioConfig& scenario);

}  // namespace swcrt
