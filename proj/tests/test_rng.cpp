#include <doctest.h>

#include <cmath>
#include <set>

#include "swcrt/rng.hpp"

using namespace swcrt;

TEST_CASE("streams are deterministic") {
  RngStream a(42, "scenario", 7);
  RngStream b(42, "scenario", 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams for distinct replications differ") {
  RngStream a(42, "scenario", 0);
  RngStream b(42, "scenario", 1);
  RngStream c(43, "scenario", 0);
  RngStream d(42, "other", 0);
  std::set<std::uint64_t> firsts = {a.next_u64(), b.next_u64(), c.next_u64(), d.next_u64()};
  CHECK(firsts.size() == 4);
}

TEST_CASE("uniform draws live strictly inside (0,1)") {
  RngStream stream(1, "u", 0);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = stream.next_uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("normal draws have the right first moments") {
  RngStream stream(7, "n", 3);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = stream.next_normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("replication streams look mutually independent") {
  const int reps = 2000;
  double cross = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream a(99, "indep", static_cast<std::uint64_t>(r));
    RngStream b(99, "indep", static_cast<std::uint64_t>(r + 1));
    cross += a.next_normal() * b.next_normal();
  }
  CHECK(std::fabs(cross / reps) < 4.0 / std::sqrt(static_cast<double>(reps)));
}
