#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "conecover/graph.hpp"

namespace conecover {

// Continuous-time multi-type Galton-Watson process coupled to the walk: a
// particle of type i dies at rate p(-i) and spawns a type-j particle at rate
// p(i,j), so the per-particle total rate is exactly 1.
struct GwOutcome {
  enum class Kind { extinct, exceeded_cap, timed_out } kind = Kind::extinct;
  double time = 0;
  std::int64_t events = 0;
  std::int64_t peak_population = 0;
  std::map<Vid, std::int64_t> population;  // nonzero types at stop (timed_out/cap)
};

GwOutcome simulate_gw(const BaseGraph& g, std::int64_t cap, double t_max, std::uint64_t seed,
                      std::uint64_t stream = 0);

// Tally over independent trials.
struct GwTally {
  std::int64_t trials = 0;
  std::int64_t extinct = 0;
  std::int64_t exceeded_cap = 0;
  std::int64_t timed_out = 0;
  double q_hat = 0;
  double q_se = 0;
};
GwTally gw_extinction_probability(const BaseGraph& g, std::int64_t trials, std::int64_t cap,
                                  double t_max, std::uint64_t seed);

// Coupling identity check: extinction probability of the branching process
// vs the walk's probability of traversing the root loop, with matched trial
// counts. The cap/horizon truncations bias both estimates downward; the
// documented allowance is 1/cap + 10/horizon.
struct CoupleReport {
  std::int64_t trials = 0;
  std::int64_t cap = 0;
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  double q_gw_hat = 0, q_gw_se = 0;
  double q_walk_hat = 0, q_walk_se = 0;
  double bias_allowance = 0;
  bool compatible = false;
  std::string note;
};
CoupleReport couple_check(const BaseGraph& g, std::int64_t trials, std::int64_t cap,
                          std::int64_t horizon, std::uint64_t seed);

}  // namespace conecover
