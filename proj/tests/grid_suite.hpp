#pragma once

// Seeded 4x4 oracle instances shared by the unit tests and the acceptance run.
// Costs are drawn in a middle band where the optimum opens a few facilities.

#include <cstdint>
#include <random>
#include <vector>

#include "transship/discrete.hpp"

namespace suite {

inline transship::grid::GridInstance seeded_4x4(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> f(0.5, 3.0), C(0.2, 1.2);
  std::uniform_int_distribution<int> depot(0, 15);
  transship::grid::GridInstance inst;
  inst.m = 4;
  inst.facility_cost = f(gen);
  inst.outbound_rate = 1.0;
  inst.inbound_rate = C(gen);
  inst.depot = depot(gen);
  return inst;
}

inline std::vector<std::uint64_t> suite_seeds() { return {1, 2, 3, 4, 5}; }

}  // namespace suite
