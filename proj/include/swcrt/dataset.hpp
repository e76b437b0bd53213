#pragma once

#include <vector>

namespace swcrt {

enum class Family { continuous, binary };

// Long-format observation. For binary outcomes y counts events out of
// `trials` (1 for individual-level rows); continuous rows have trials == 1.
struct Observation {
  int cluster = 0;
  int period = 0;
  int individual = 0;
  int exposure = 0;
  int treat = 0;
  double y = 0.0;
  int trials = 1;
};

struct Dataset {
  Family family = Family::continuous;
  std::vector<Observation> rows;
};

}  // namespace swcrt
