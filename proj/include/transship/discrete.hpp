#pragma once

// Discrete location-routing on an M x M unit grid: every grid point is a
// customer with unit demand and a candidate facility. A solution opens a set
// of facilities (the depot always open), assigns every point to an open
// facility and routes one inbound tour through the open facilities.
//
//   objective = f * |open| + c * sum_j d(owner(j), j) + C * tour length

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "transship/analytic.hpp"
#include "transship/format.hpp"
#include "transship/geometry.hpp"
#include "transship/metric.hpp"
#include "transship/sampling.hpp"
#include "transship/tessellation.hpp"

namespace transship::grid {

struct GridInstance {
  int m = 2;
  double facility_cost = 1.0;
  double outbound_rate = 1.0;
  double inbound_rate = 1.0;
  Metric metric = Metric::euclid;
  int depot = 0;

  int size() const { return m * m; }
  geom::Point point(int i) const { return {static_cast<double>(i % m), static_cast<double>(i / m)}; }
  double dist(int i, int j) const {
    return distance(metric, static_cast<double>(i % m - j % m), static_cast<double>(i / m - j / m));
  }

  void validate() const {
    if (m < 2) throw std::domain_error("grid dimension m must be >= 2");
    if (!(facility_cost > 0.0) || !(outbound_rate > 0.0) || !(inbound_rate > 0.0))
      throw std::domain_error("grid costs must be positive");
    if (depot < 0 || depot >= size()) throw std::domain_error("depot index out of range");
  }
};

struct GridSolution {
  std::vector<int> facilities;  // sorted, contains the depot
  std::vector<int> assignment;  // owner facility per grid point
  std::vector<int> tour;        // open facilities, starting at the depot
  CostBreakdown objective;
};

class InvalidSolution : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SizeLimitExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

// ---------------------------------------------------------------------------
// Evaluation

inline double tour_length(const GridInstance& inst, const std::vector<int>& tour) {
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < tour.size(); ++k) len += inst.dist(tour[k], tour[k + 1]);
  if (tour.size() > 1) len += inst.dist(tour.back(), tour.front());
  return len;
}

/// Structural check against the model constraints; throws InvalidSolution naming the violated one.
inline void check_structure(const GridInstance& inst, const GridSolution& sol) {
  inst.validate();
  const int n = inst.size();
  std::vector<char> open(n, 0);
  for (std::size_t k = 0; k < sol.facilities.size(); ++k) {
    const int i = sol.facilities[k];
    if (i < 0 || i >= n) throw InvalidSolution("facility index " + std::to_string(i) + " out of range");
    if (k > 0 && sol.facilities[k - 1] >= i) throw InvalidSolution("facility set must be sorted and unique");
    open[i] = 1;
  }
  if (!open[inst.depot]) throw InvalidSolution("depot must be an open facility (tour start, u_o = 0)");
  if (static_cast<int>(sol.assignment.size()) != n)
    throw InvalidSolution("assign: every grid point needs exactly one assigned facility");
  for (int j = 0; j < n; ++j) {
    const int i = sol.assignment[j];
    if (i < 0 || i >= n || !open[i])
      throw InvalidSolution("link: point " + std::to_string(j) + " assigned to facility " + std::to_string(i) +
                            " that is not open");
  }
  if (sol.tour.size() != sol.facilities.size())
    throw InvalidSolution("degree: tour must pass every open facility exactly once");
  std::vector<char> seen(n, 0);
  for (int i : sol.tour) {
    if (i < 0 || i >= n || !open[i] || seen[i])
      throw InvalidSolution("degree: tour must pass every open facility exactly once");
    seen[i] = 1;
  }
  if (sol.tour.front() != inst.depot) throw InvalidSolution("subtour: tour must start at the depot");
}

inline CostBreakdown evaluate(const GridInstance& inst, const GridSolution& sol) {
  check_structure(inst, sol);
  double outbound = 0.0;
  for (int j = 0; j < inst.size(); ++j) outbound += inst.dist(sol.assignment[j], j);
  return CostBreakdown::of(inst.facility_cost * static_cast<double>(sol.facilities.size()),
                           inst.outbound_rate * outbound, inst.inbound_rate * tour_length(inst, sol.tour));
}

/// Nearest open facility per point; ties go to the lowest facility index.
inline std::vector<int> nearest_assignment(const GridInstance& inst, const std::vector<int>& facilities) {
  if (facilities.empty()) throw std::domain_error("nearest_assignment needs at least one facility");
  std::vector<int> sorted = facilities;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> owner(inst.size());
  for (int j = 0; j < inst.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i : sorted) {
      const double d = inst.dist(i, j);
      if (d < best) {
        best = d;
        owner[j] = i;
      }
    }
  }
  return owner;
}

// ---------------------------------------------------------------------------
// Tours

struct Tour {
  std::vector<int> order;  // indices into the point list, starting at 0
  double length = 0.0;
};

enum class TourMode { exact, heuristic };

inline constexpr std::size_t kExactTourMaxPoints = 15;

using DistanceMatrix = std::vector<std::vector<double>>;

inline DistanceMatrix distance_matrix(const std::vector<geom::Point>& pts, Metric metric) {
  DistanceMatrix d(pts.size(), std::vector<double>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) d[i][j] = distance(metric, pts[i].x - pts[j].x, pts[i].y - pts[j].y);
  return d;
}

inline double cycle_length(const DistanceMatrix& d, const std::vector<int>& order) {
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) len += d[order[k]][order[k + 1]];
  if (order.size() > 1) len += d[order.back()][order.front()];
  return len;
}

/// Held-Karp over subsets; node 0 is the start.
inline Tour held_karp(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n > kExactTourMaxPoints)
    throw SizeLimitExceeded("exact tour limited to " + std::to_string(kExactTourMaxPoints) + " points");
  if (n <= 3) {
    Tour t;
    for (std::size_t i = 0; i < n; ++i) t.order.push_back(static_cast<int>(i));
    t.length = cycle_length(d, t.order);
    return t;
  }
  const int k = static_cast<int>(n) - 1;
  const std::uint32_t full = 1u << k;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(static_cast<std::size_t>(full) * k, inf);
  std::vector<std::int8_t> parent(static_cast<std::size_t>(full) * k, -1);
  for (int j = 0; j < k; ++j) dp[(1u << j) * k + j] = d[0][j + 1];
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    for (int j = 0; j < k; ++j) {
      const double cur = dp[static_cast<std::size_t>(mask) * k + j];
      if (!(mask & (1u << j)) || cur == inf) continue;
      for (int nx = 0; nx < k; ++nx) {
        if (mask & (1u << nx)) continue;
        const std::size_t idx = static_cast<std::size_t>(mask | (1u << nx)) * k + nx;
        const double cand = cur + d[j + 1][nx + 1];
        if (cand < dp[idx]) {
          dp[idx] = cand;
          parent[idx] = static_cast<std::int8_t>(j);
        }
      }
    }
  }
  double best = inf;
  int last = 0;
  for (int j = 0; j < k; ++j) {
    const double cand = dp[static_cast<std::size_t>(full - 1) * k + j] + d[j + 1][0];
    if (cand < best) {
      best = cand;
      last = j;
    }
  }
  std::vector<int> rev;
  std::uint32_t mask = full - 1;
  for (int j = last; j >= 0;) {
    rev.push_back(j + 1);
    const int p = parent[static_cast<std::size_t>(mask) * k + j];
    mask &= ~(1u << j);
    j = p;
  }
  Tour t;
  t.order.push_back(0);
  t.order.insert(t.order.end(), rev.rbegin(), rev.rend());
  t.length = best;
  return t;
}

namespace detail {

// Sequential generator for the heuristics (splitmix64 stream).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return splitmix64(state_++); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

inline bool two_opt_pass(const DistanceMatrix& d, std::vector<int>& t) {
  const std::size_t n = t.size();
  bool improved = false;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const int a = t[i], b = t[i + 1], c = t[j], e = t[(j + 1) % n];
      const double delta = d[a][c] + d[b][e] - d[a][b] - d[c][e];
      if (delta < -1e-10) {
        std::reverse(t.begin() + static_cast<std::ptrdiff_t>(i) + 1, t.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        improved = true;
      }
    }
  }
  return improved;
}

// Move a segment of 1..3 consecutive nodes (never the start) elsewhere, possibly reversed.
inline bool or_opt_pass(const DistanceMatrix& d, std::vector<int>& t) {
  const std::size_t n = t.size();
  if (n < 5) return false;
  bool improved = false;
  for (std::size_t len = 1; len <= 3; ++len) {
    for (std::size_t s = 1; s + len <= n; ++s) {
      const int prev = t[s - 1], first = t[s], last = t[s + len - 1], next = t[(s + len) % n];
      const double removed = d[prev][first] + d[last][next] - d[prev][next];
      for (std::size_t p = 0; p < n; ++p) {
        if (p + 1 >= s && p < s + len) continue;  // insertion edge touches the segment
        const int u = t[p], v = t[(p + 1) % n];
        if (u == prev && v == next) continue;
        const double fwd = d[u][first] + d[last][v] - d[u][v];
        const double bwd = d[u][last] + d[first][v] - d[u][v];
        if (std::min(fwd, bwd) - removed < -1e-10) {
          std::vector<int> seg(t.begin() + static_cast<std::ptrdiff_t>(s),
                               t.begin() + static_cast<std::ptrdiff_t>(s + len));
          if (bwd < fwd) std::reverse(seg.begin(), seg.end());
          t.erase(t.begin() + static_cast<std::ptrdiff_t>(s), t.begin() + static_cast<std::ptrdiff_t>(s + len));
          const auto at = std::find(t.begin(), t.end(), u) - t.begin();
          t.insert(t.begin() + at + 1, seg.begin(), seg.end());
          improved = true;
          break;
        }
      }
    }
  }
  return improved;
}

/// 2-opt and or-opt until neither improves; position 0 stays fixed.
inline void improve_tour(const DistanceMatrix& d, std::vector<int>& t) {
  if (t.size() <= 3) return;
  for (int guard = 0; guard < 10000; ++guard) {
    const bool a = two_opt_pass(d, t);
    const bool b = or_opt_pass(d, t);
    if (!a && !b) break;
  }
}

}  // namespace detail

/// Nearest-neighbor construction (seeded tie-breaking) improved by 2-opt and
/// or-opt until no improving move remains. Starts at node 0.
inline Tour heuristic_tour(const DistanceMatrix& d, std::uint64_t seed) {
  const std::size_t n = d.size();
  Tour t;
  if (n == 0) return t;
  detail::Rng rng(seed);
  std::vector<char> used(n, 0);
  t.order.push_back(0);
  used[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const int cur = t.order.back();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> ties;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      if (d[cur][j] < best - 1e-12) {
        best = d[cur][j];
        ties.assign(1, static_cast<int>(j));
      } else if (d[cur][j] <= best + 1e-12) {
        ties.push_back(static_cast<int>(j));
      }
    }
    const int pick = ties[rng.below(ties.size())];
    used[pick] = 1;
    t.order.push_back(pick);
  }
  detail::improve_tour(d, t.order);
  t.length = cycle_length(d, t.order);
  return t;
}

/// Closed tour through all points starting at points[0].
inline Tour tsp_tour(const std::vector<geom::Point>& points, Metric metric, TourMode mode, std::uint64_t seed = 0) {
  const DistanceMatrix d = distance_matrix(points, metric);
  return mode == TourMode::exact ? held_karp(d) : heuristic_tour(d, seed);
}

/// True when two non-adjacent tour segments properly cross.
inline bool has_crossing(const std::vector<geom::Point>& pts, const std::vector<int>& order) {
  const std::size_t n = order.size();
  if (n < 4) return false;
  auto orient = [](geom::Point a, geom::Point b, geom::Point c) { return geom::cross(b - a, c - a); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const auto a = pts[order[i]], b = pts[order[(i + 1) % n]], c = pts[order[j]], e = pts[order[(j + 1) % n]];
      const double o1 = orient(a, b, c), o2 = orient(a, b, e), o3 = orient(c, e, a), o4 = orient(c, e, b);
      if (((o1 > 1e-12 && o2 < -1e-12) || (o1 < -1e-12 && o2 > 1e-12)) &&
          ((o3 > 1e-12 && o4 < -1e-12) || (o3 < -1e-12 && o4 > 1e-12)))
        return true;
    }
  }
  return false;
}

namespace detail {

// Tour over grid facility indices, rotated to start at the depot.
inline std::vector<int> route_facilities(const GridInstance& inst, const std::vector<int>& open, TourMode mode,
                                         std::uint64_t seed) {
  std::vector<int> nodes{inst.depot};
  for (int i : open)
    if (i != inst.depot) nodes.push_back(i);
  std::vector<geom::Point> pts;
  for (int i : nodes) pts.push_back(inst.point(i));
  const Tour t = tsp_tour(pts, inst.metric, mode, seed);
  std::vector<int> out;
  for (int k : t.order) out.push_back(nodes[k]);
  return out;
}

// Tour over `open` derived from `hint`, a tour over a nearby set: drop
// nodes no longer open, cheapest-insert new ones, then local search.
inline std::vector<int> repair_route(const GridInstance& inst, const std::vector<int>& open,
                                     const std::vector<int>& hint) {
  std::vector<int> tour;
  for (int i : hint)
    if (std::binary_search(open.begin(), open.end(), i)) tour.push_back(i);
  if (tour.empty() || tour.front() != inst.depot) tour.insert(tour.begin(), inst.depot);
  for (int i : open) {
    if (std::find(tour.begin(), tour.end(), i) != tour.end()) continue;
    std::size_t at = tour.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tour.size(); ++k) {
      const int u = tour[k], v = tour[(k + 1) % tour.size()];
      const double add = inst.dist(u, i) + inst.dist(i, v) - (tour.size() > 1 ? inst.dist(u, v) : 0.0);
      if (add < best) {
        best = add;
        at = k + 1;
      }
    }
    tour.insert(tour.begin() + static_cast<std::ptrdiff_t>(at), i);
  }
  std::vector<geom::Point> pts;
  for (int i : tour) pts.push_back(inst.point(i));
  const DistanceMatrix d = distance_matrix(pts, inst.metric);
  std::vector<int> order(tour.size());
  std::iota(order.begin(), order.end(), 0);
  improve_tour(d, order);
  std::vector<int> out;
  for (int k : order) out.push_back(tour[k]);
  return out;
}

inline GridSolution make_solution(const GridInstance& inst, std::vector<int> open, std::vector<int> tour) {
  std::sort(open.begin(), open.end());
  GridSolution sol;
  sol.assignment = nearest_assignment(inst, open);
  sol.facilities = std::move(open);
  sol.tour = std::move(tour);
  sol.objective = evaluate(inst, sol);
  return sol;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact oracle

/// Global optimum over all facility sets containing the depot, with nearest
/// assignment and exact tours. One Held-Karp table over all candidates gives
/// every subset's tour length.
inline GridSolution exhaustive_optimum(const GridInstance& inst) {
  inst.validate();
  if (inst.m > 4) throw SizeLimitExceeded("exhaustive_optimum supports m <= 4");
  const int n = inst.size();
  std::vector<int> others;
  for (int i = 0; i < n; ++i)
    if (i != inst.depot) others.push_back(i);
  const int k = static_cast<int>(others.size());
  const std::uint32_t full = 1u << k;
  const double inf = std::numeric_limits<double>::infinity();
  // node 0 = depot, node j+1 = others[j]
  auto node_dist = [&](int a, int b) {
    const int ga = a == 0 ? inst.depot : others[a - 1];
    const int gb = b == 0 ? inst.depot : others[b - 1];
    return inst.dist(ga, gb);
  };
  std::vector<double> dp(static_cast<std::size_t>(full) * k, inf);
  for (int j = 0; j < k; ++j) dp[(1u << j) * k + j] = node_dist(0, j + 1);
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    for (int j = 0; j < k; ++j) {
      const double cur = dp[static_cast<std::size_t>(mask) * k + j];
      if (!(mask & (1u << j)) || cur == inf) continue;
      for (int nx = 0; nx < k; ++nx) {
        if (mask & (1u << nx)) continue;
        double& slot = dp[static_cast<std::size_t>(mask | (1u << nx)) * k + nx];
        slot = std::min(slot, cur + node_dist(j + 1, nx + 1));
      }
    }
  }
  double best = inf;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    double tour = 0.0;
    if (mask != 0) {
      tour = inf;
      for (int j = 0; j < k; ++j)
        if (mask & (1u << j)) tour = std::min(tour, dp[static_cast<std::size_t>(mask) * k + j] + node_dist(j + 1, 0));
    }
    double outbound = 0.0;
    for (int p = 0; p < n; ++p) {
      double dmin = inst.dist(inst.depot, p);
      for (int j = 0; j < k; ++j)
        if (mask & (1u << j)) dmin = std::min(dmin, inst.dist(others[j], p));
      outbound += dmin;
    }
    const double obj = inst.facility_cost * (std::popcount(mask) + 1) + inst.outbound_rate * outbound +
                       inst.inbound_rate * tour;
    if (obj < best) {
      best = obj;
      best_mask = mask;
    }
  }
  std::vector<int> open{inst.depot};
  for (int j = 0; j < k; ++j)
    if (best_mask & (1u << j)) open.push_back(others[j]);
  return detail::make_solution(inst, open, detail::route_facilities(inst, open, TourMode::exact, 0));
}

// ---------------------------------------------------------------------------
// Simulated annealing

struct AnnealingSchedule {
  double initial_temperature = -1.0;  // <= 0: 10% of the initial objective
  double cooling = 0.97;
  int temperature_steps = 400;
  int moves_per_temperature = 50;
  /// Facility sets up to this size are routed exactly; larger ones heuristically.
  int exact_tour_max = 9;

  void validate() const {
    if (!(cooling > 0.0 && cooling < 1.0)) throw std::domain_error("cooling factor must be in (0, 1)");
    if (temperature_steps < 1 || moves_per_temperature < 1) throw std::domain_error("schedule needs positive counts");
  }
};

struct AnnealingResult {
  GridSolution best;
  std::vector<double> best_trace;  // best objective after each temperature step
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;
};

/// Search over facility sets (the depot fixed open); assignment is the nearest
/// assignment and the tour is routed per set. Deterministic for a fixed seed.
inline AnnealingResult simulated_annealing(const GridInstance& inst, const AnnealingSchedule& schedule,
                                           std::uint64_t seed) {
  inst.validate();
  schedule.validate();
  const int n = inst.size();
  detail::Rng rng(seed);

  struct Eval {
    double objective;
    std::vector<int> tour;
  };
  std::map<std::vector<int>, Eval> cache;  // key: sorted open set
  const int m = inst.m;
  std::vector<double> offset_dist(static_cast<std::size_t>(n));
  for (int dx = 0; dx < m; ++dx)
    for (int dy = 0; dy < m; ++dy) offset_dist[dx * m + dy] = distance(inst.metric, dx, dy);
  // Small sets are routed exactly; larger ones by repairing the current tour.
  auto evaluate_set = [&](const std::vector<int>& open, const std::vector<int>& hint) -> const Eval& {
    auto it = cache.find(open);
    if (it != cache.end()) return it->second;
    std::vector<int> tour = static_cast<int>(open.size()) <= schedule.exact_tour_max
                                ? detail::route_facilities(inst, open, TourMode::exact, seed)
                                : detail::repair_route(inst, open, hint);
    double outbound = 0.0;
    for (int j = 0; j < n; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int i : open) best = std::min(best, offset_dist[std::abs(i % m - j % m) * m + std::abs(i / m - j / m)]);
      outbound += best;
    }
    const double obj = inst.facility_cost * static_cast<double>(open.size()) + inst.outbound_rate * outbound +
                       inst.inbound_rate * tour_length(inst, tour);
    if (cache.size() > 200000) cache.clear();
    return cache.emplace(open, Eval{obj, std::move(tour)}).first->second;
  };

  std::vector<char> is_open(n, 0);
  is_open[inst.depot] = 1;
  std::vector<int> current{inst.depot};
  std::vector<int> current_tour = current;
  double current_obj = evaluate_set(current, current_tour).objective;
  std::vector<int> best = current;
  double best_obj = current_obj;
  double temperature = schedule.initial_temperature > 0.0 ? schedule.initial_temperature : 0.1 * current_obj;

  AnnealingResult result;
  result.seed = seed;
  auto random_closed = [&]() {
    for (;;) {
      const int i = static_cast<int>(rng.below(n));
      if (!is_open[i]) return i;
    }
  };
  auto random_open_nondepot = [&]() {
    for (;;) {
      const int i = current[rng.below(current.size())];
      if (i != inst.depot) return i;
    }
  };

  for (int step = 0; step < schedule.temperature_steps; ++step) {
    for (int mv = 0; mv < schedule.moves_per_temperature; ++mv) {
      const bool any_closed = static_cast<int>(current.size()) < n;
      const bool any_removable = current.size() > 1;
      std::vector<int> candidate = current;
      const auto kind = rng.below(4);
      if (kind == 0 && any_closed) {  // open
        candidate.push_back(random_closed());
      } else if (kind == 1 && any_removable) {  // close
        const int i = random_open_nondepot();
        candidate.erase(std::find(candidate.begin(), candidate.end(), i));
      } else if (kind == 2 && any_closed && any_removable) {  // swap
        const int out = random_open_nondepot();
        const int in = random_closed();
        *std::find(candidate.begin(), candidate.end(), out) = in;
      } else if (kind == 3 && any_removable) {  // relocate to a grid neighbor
        const int i = random_open_nondepot();
        static constexpr int dx[] = {1, -1, 0, 0, 1, 1, -1, -1};
        static constexpr int dy[] = {0, 0, 1, -1, 1, -1, 1, -1};
        const auto dir = rng.below(8);
        const int x = i % inst.m + dx[dir], y = i / inst.m + dy[dir];
        if (x < 0 || y < 0 || x >= inst.m || y >= inst.m || is_open[y * inst.m + x]) continue;
        *std::find(candidate.begin(), candidate.end(), i) = y * inst.m + x;
      } else {
        continue;
      }
      std::sort(candidate.begin(), candidate.end());
      const Eval& ev = evaluate_set(candidate, current_tour);
      const double obj = ev.objective;
      ++result.evaluations;
      const double delta = obj - current_obj;
      if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temperature)) {
        for (int i : current) is_open[i] = 0;
        current = std::move(candidate);
        current_tour = ev.tour;
        for (int i : current) is_open[i] = 1;
        current_obj = obj;
        if (obj < best_obj) {
          best_obj = obj;
          best = current;
        }
      }
    }
    result.best_trace.push_back(best_obj);
    temperature *= schedule.cooling;
  }

  std::vector<int> tour = evaluate_set(best, current_tour).tour;
  if (best.size() <= kExactTourMaxPoints && static_cast<int>(best.size()) > schedule.exact_tour_max) {
    auto exact = detail::route_facilities(inst, best, TourMode::exact, seed);
    if (tour_length(inst, exact) < tour_length(inst, tour)) tour = std::move(exact);
  }
  result.best = detail::make_solution(inst, best, std::move(tour));
  return result;
}

/// Independent seeded runs in parallel; results ordered by seed.
inline std::vector<AnnealingResult> anneal_runs(const GridInstance& inst, const AnnealingSchedule& schedule,
                                                const std::vector<std::uint64_t>& seeds) {
  std::vector<AnnealingResult> out(seeds.size());
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < seeds.size(); ++k)
    threads.emplace_back([&, k] { out[k] = simulated_annealing(inst, schedule, seeds[k]); });
  for (auto& t : threads) t.join();
  return out;
}

/// Lowest objective; ties go to the earlier run (seed order).
inline const AnnealingResult& best_run(const std::vector<AnnealingResult>& runs) {
  if (runs.empty()) throw std::invalid_argument("best_run needs at least one run");
  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].best.objective.total < runs[best].best.objective.total) best = k;
  return runs[best];
}

// ---------------------------------------------------------------------------
// MIP export (LP text format)

struct MipCounts {
  std::size_t x_vars = 0, y_vars = 0, z_vars = 0, u_vars = 0;
  std::size_t assign_rows = 0;    // the per-point "served once" row appears twice in the model; written once
  std::size_t link_rows = 0;
  std::size_t in_degree_rows = 0;
  std::size_t out_degree_rows = 0;
  std::size_t mtz_rows = 0;
};

namespace detail {

class TermWriter {
 public:
  explicit TermWriter(std::ostream& os) : os_(os) {}
  void term(double coef, const std::string& var) {
    if (count_ > 0 && count_ % 6 == 0) os_ << "\n   ";
    if (coef < 0.0) {
      os_ << " - ";
      coef = -coef;
    } else if (count_ > 0) {
      os_ << " + ";
    } else {
      os_ << ' ';
    }
    if (coef != 1.0) os_ << format_number(coef, 6) << ' ';
    os_ << var;
    ++count_;
  }

 private:
  std::ostream& os_;
  std::size_t count_ = 0;
};

inline std::string var(char name, int i) { return std::string(1, name) + "_" + std::to_string(i); }
inline std::string var(char name, int i, int j) {
  return std::string(1, name) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

}  // namespace detail

/// Writes the location-routing MIP: binaries X_i, Y_i_j, Z_i_j, continuous u_i
/// with MTZ subtour elimination (big-M = M^2).
inline MipCounts write_mip(std::ostream& os, const GridInstance& inst, const Metadata& meta = {}) {
  inst.validate();
  const int n = inst.size();
  const int o = inst.depot;
  const double big_m = static_cast<double>(n);
  MipCounts c;
  meta.write_comment_block(os, "\\ ");
  os << "\\ grid " << inst.m << "x" << inst.m << ", metric " << to_string(inst.metric) << ", depot " << o << "\n";
  os << "Minimize\n obj:";
  {
    detail::TermWriter w(os);
    for (int i = 0; i < n; ++i) w.term(inst.facility_cost, detail::var('X', i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (inst.dist(i, j) > 0.0) w.term(inst.outbound_rate * inst.dist(i, j), detail::var('Y', i, j));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (inst.dist(i, j) > 0.0) w.term(inst.inbound_rate * inst.dist(i, j), detail::var('Z', i, j));
  }
  os << "\nSubject To\n";
  os << "\\ each point assigned once (the model states this row twice; it is written once)\n";
  for (int j = 0; j < n; ++j) {
    os << " assign_" << j << ":";
    detail::TermWriter w(os);
    for (int i = 0; i < n; ++i) w.term(1.0, detail::var('Y', i, j));
    os << " = 1\n";
    ++c.assign_rows;
  }
  os << "\\ assign only to open facilities\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      os << " link_" << i << "_" << j << ": " << detail::var('Y', i, j) << " - " << detail::var('X', i) << " <= 0\n";
      ++c.link_rows;
    }
  }
  os << "\\ tour enters every open facility once\n";
  for (int j = 0; j < n; ++j) {
    os << " in_" << j << ":";
    detail::TermWriter w(os);
    for (int i = 0; i < n; ++i) w.term(1.0, detail::var('Z', i, j));
    w.term(-1.0, detail::var('X', j));
    os << " = 0\n";
    ++c.in_degree_rows;
  }
  os << "\\ tour leaves every open facility once\n";
  for (int i = 0; i < n; ++i) {
    os << " out_" << i << ":";
    detail::TermWriter w(os);
    for (int j = 0; j < n; ++j) w.term(1.0, detail::var('Z', i, j));
    w.term(-1.0, detail::var('X', i));
    os << " = 0\n";
    ++c.out_degree_rows;
  }
  os << "\\ MTZ subtour elimination over non-depot pairs\n";
  for (int i = 0; i < n; ++i) {
    if (i == o) continue;
    for (int j = 0; j < n; ++j) {
      if (j == o) continue;
      os << " mtz_" << i << "_" << j << ": ";
      if (i != j) os << detail::var('u', i) << " - " << detail::var('u', j) << " + ";
      os << format_number(big_m, 6) << ' ' << detail::var('Z', i, j) << " <= " << format_number(big_m - 1.0, 6)
         << "\n";
      ++c.mtz_rows;
    }
  }
  os << " depot_open: " << detail::var('X', o) << " = 1\n";
  os << "Bounds\n";
  for (int i = 0; i < n; ++i) {
    if (i == o)
      os << " " << detail::var('u', i) << " = 0\n";
    else
      os << " 0 <= " << detail::var('u', i) << " <= " << format_number(big_m - 1.0, 6) << "\n";
    ++c.u_vars;
  }
  os << "Binaries\n";
  for (int i = 0; i < n; ++i) {
    os << " " << detail::var('X', i) << "\n";
    ++c.x_vars;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      os << " " << detail::var('Y', i, j) << "\n";
      ++c.y_vars;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      os << " " << detail::var('Z', i, j) << "\n";
      ++c.z_vars;
    }
  os << "End\n";
  return c;
}

inline MipCounts export_mip(const GridInstance& inst, const std::filesystem::path& path, const Metadata& meta = {}) {
  std::ostringstream os;
  const MipCounts c = write_mip(os, inst, meta);
  transship::detail::write_file(path, os.str());
  return c;
}

// ---------------------------------------------------------------------------
// Basic-angle measurement

struct CellAngles {
  int facility = 0;
  double alpha_deg = 0.0;
  double alpha_bar_deg = 0.0;
  int n_edges = 0;
  bool degenerate = false;           // fewer than 4 edges
  bool tour_edges_found = false;     // both tour neighbors share an edge with the cell
  double max_perpendicular_error_deg = 0.0;
};

struct AngleReport {
  std::vector<CellAngles> cells;  // interior facilities only
  double mean_alpha_deg = 0.0, std_alpha_deg = 0.0;
  double mean_alpha_bar_deg = 0.0, std_alpha_bar_deg = 0.0;
  std::vector<std::string> warnings;
};

/// Reference values of a 50 x 50 grid experiment, kept for comparison output.
struct ReferenceAngleFixture {
  Metric metric;
  int m;
  double facility_cost, outbound_rate, inbound_rate;
  double measured_alpha_deg, measured_alpha_bar_deg;
  double theoretical_alpha_deg, theoretical_alpha_bar_deg;
  double theoretical_facilities;  // 0 when not reported
};

inline constexpr ReferenceAngleFixture kReferenceEuclideanFixture{Metric::euclid, 50, 299.66, 1.0, 12.0, 52.3, 18.8,
                                                          53.2,           18.4, 34.0};
inline constexpr ReferenceAngleFixture kReferenceL1Fixture{Metric::l1, 50, 199.31, 1.0, 12.0, 45.0, 0.0, 44.5, 0.0, 0.0};

namespace detail {

struct Cell {
  geom::TaggedPolygon poly;
  bool ok = true;
};

// L1 cells: label points by nearest facility, fit each shared boundary with a
// total-least-squares line through the midpoints of differently-labeled
// grid neighbors, then intersect the half-planes.
inline std::vector<Cell> l1_cells(const GridInstance& inst, const GridSolution& sol, const geom::Box& box) {
  const int m = inst.m;
  std::map<std::pair<int, int>, std::vector<geom::Point>> boundary;
  auto add = [&](int p, int q) {
    const int a = sol.assignment[p], b = sol.assignment[q];
    if (a == b) return;
    const geom::Point mid = 0.5 * (inst.point(p) + inst.point(q));
    boundary[{std::min(a, b), std::max(a, b)}].push_back(mid);
  };
  for (int y = 0; y < m; ++y)
    for (int x = 0; x < m; ++x) {
      if (x + 1 < m) add(y * m + x, y * m + x + 1);
      if (y + 1 < m) add(y * m + x, (y + 1) * m + x);
    }
  std::map<int, std::size_t> slot;
  for (std::size_t k = 0; k < sol.facilities.size(); ++k) slot[sol.facilities[k]] = k;
  std::vector<Cell> cells(sol.facilities.size());
  for (auto& c : cells) {
    c.poly.vertices = {{box.x0, box.y0}, {box.x1, box.y0}, {box.x1, box.y1}, {box.x0, box.y1}};
    c.poly.edge_tags = {-1, -1, -1, -1};
  }
  for (const auto& [key, pts] : boundary) {
    if (pts.size() < 3) continue;
    geom::Point mean{};
    for (const auto& p : pts) mean = mean + p;
    mean = (1.0 / static_cast<double>(pts.size())) * mean;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
      const auto q = p - mean;
      sxx += q.x * q.x;
      syy += q.y * q.y;
      sxy += q.x * q.y;
    }
    // Normal = eigenvector of the smaller eigenvalue of the scatter matrix.
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);  // major axis direction
    const geom::Point normal{-std::sin(theta), std::cos(theta)};
    for (int side = 0; side < 2; ++side) {
      const int self = side == 0 ? key.first : key.second;
      const int other = side == 0 ? key.second : key.first;
      geom::Point nrm = normal;
      if (geom::dot(nrm, inst.point(self) - mean) > 0.0) nrm = -1.0 * nrm;
      auto& cell = cells[slot[self]];
      cell.poly = geom::clip(cell.poly, nrm, geom::dot(nrm, mean), static_cast<int>(slot[other]));
    }
  }
  return cells;
}

}  // namespace detail

/// Voronoi cell geometry of interior facilities (cell inside the grid box
/// shrunk by 2 units) and their half basic angles: alpha over the two sides
/// shared with tour neighbors, alpha_bar over the rest.
inline AngleReport measure_basic_angles(const GridInstance& inst, const GridSolution& sol) {
  check_structure(inst, sol);
  const geom::Box box{0.0, 0.0, static_cast<double>(inst.m - 1), static_cast<double>(inst.m - 1)};
  const geom::Box shrunk{2.0, 2.0, box.x1 - 2.0, box.y1 - 2.0};
  std::vector<geom::Point> sites;
  for (int i : sol.facilities) sites.push_back(inst.point(i));

  std::vector<detail::Cell> cells;
  if (inst.metric == Metric::euclid) {
    for (std::size_t k = 0; k < sites.size(); ++k) cells.push_back({geom::voronoi_cell(sites, k, box), true});
  } else {
    cells = detail::l1_cells(inst, sol, box);
  }

  std::map<int, std::size_t> slot;
  for (std::size_t k = 0; k < sol.facilities.size(); ++k) slot[sol.facilities[k]] = k;
  const std::size_t tn = sol.tour.size();

  AngleReport report;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const auto& poly = cells[k].poly;
    if (poly.vertices.empty()) continue;
    bool interior = true;
    for (const auto& v : poly.vertices) interior = interior && shrunk.contains(v, 1e-9);
    for (int tag : poly.edge_tags) interior = interior && tag >= 0;
    if (!interior) continue;

    CellAngles ca;
    ca.facility = sol.facilities[k];
    ca.n_edges = static_cast<int>(poly.vertices.size());
    ca.degenerate = ca.n_edges < 4;
    if (ca.degenerate) report.warnings.push_back("facility " + std::to_string(ca.facility) + ": cell has fewer than 4 edges");
    const auto pos = std::find(sol.tour.begin(), sol.tour.end(), ca.facility) - sol.tour.begin();
    const int prev = tn > 1 ? sol.tour[(pos + tn - 1) % tn] : -1;
    const int next = tn > 1 ? sol.tour[(pos + 1) % tn] : -1;
    const auto angles = geom::half_basic_angles(poly.vertices, sites[k]);
    double tour_sum = 0.0, rest_sum = 0.0;
    int tour_count = 0, rest_count = 0;
    for (std::size_t e = 0; e < angles.size(); ++e) {
      const int tag = poly.edge_tags[e];
      const int neighbor = tag >= 0 ? sol.facilities[static_cast<std::size_t>(tag)] : -1;
      if (tag >= 0 && (neighbor == prev || neighbor == next)) {
        tour_sum += angles[e];
        ++tour_count;
        const geom::Point edge = poly.vertices[(e + 1) % angles.size()] - poly.vertices[e];
        const geom::Point seg = sites[static_cast<std::size_t>(tag)] - sites[k];
        const double cosang = std::abs(geom::dot(edge, seg)) / (geom::norm(edge) * geom::norm(seg));
        ca.max_perpendicular_error_deg =
            std::max(ca.max_perpendicular_error_deg, to_degrees(std::asin(std::min(1.0, cosang))));
      } else {
        rest_sum += angles[e];
        ++rest_count;
      }
    }
    ca.tour_edges_found = tour_count == 2;
    if (!ca.tour_edges_found)
      report.warnings.push_back("facility " + std::to_string(ca.facility) + ": tour neighbors do not share two edges");
    if (ca.max_perpendicular_error_deg > 10.0)
      report.warnings.push_back("facility " + std::to_string(ca.facility) +
                                ": tour segment not perpendicular to shared edge");
    ca.alpha_deg = tour_count ? to_degrees(tour_sum / tour_count) : 0.0;
    ca.alpha_bar_deg = rest_count ? to_degrees(rest_sum / rest_count) : 0.0;
    report.cells.push_back(ca);
  }
  if (report.cells.size() < 4)
    throw std::domain_error("measure_basic_angles needs at least 4 interior facilities, found " +
                            std::to_string(report.cells.size()));
  auto stats = [&](auto field, double& mean, double& sd) {
    double s = 0.0, s2 = 0.0;
    for (const auto& c : report.cells) s += field(c);
    mean = s / static_cast<double>(report.cells.size());
    for (const auto& c : report.cells) s2 += (field(c) - mean) * (field(c) - mean);
    sd = report.cells.size() > 1 ? std::sqrt(s2 / static_cast<double>(report.cells.size() - 1)) : 0.0;
  };
  stats([](const CellAngles& c) { return c.alpha_deg; }, report.mean_alpha_deg, report.std_alpha_deg);
  stats([](const CellAngles& c) { return c.alpha_bar_deg; }, report.mean_alpha_bar_deg, report.std_alpha_bar_deg);
  return report;
}

inline void write_angle_csv(std::ostream& os, const AngleReport& report, const Metadata& meta = {}) {
  meta.write_comment_block(os, "# ");
  os << "facility_index,alpha_deg,alpha_bar_deg,n_edges\n";
  for (const auto& c : report.cells)
    os << c.facility << ',' << format_number(c.alpha_deg) << ',' << format_number(c.alpha_bar_deg) << ','
       << c.n_edges << '\n';
}

/// Snap a tessellation onto a fine grid: facilities move to the nearest grid
/// point after scaling by `scale` (grid units per length unit) and shifting by
/// `margin` grid units. The tour keeps the tessellation order, rotated to the depot.
inline std::pair<GridInstance, GridSolution> sample_tessellation(const Tessellation& t, double scale, int margin,
                                                                 const GridInstance& costs = {}) {
  const double w = t.window.width() * scale, h = t.window.height() * scale;
  GridInstance inst = costs;
  inst.metric = t.metric;
  inst.m = static_cast<int>(std::ceil(std::max(w, h))) + 2 * margin + 1;
  std::vector<int> index(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int x = static_cast<int>(std::lround((t.facilities[i].x - t.window.x0) * scale)) + margin;
    const int y = static_cast<int>(std::lround((t.facilities[i].y - t.window.y0) * scale)) + margin;
    index[i] = y * inst.m + x;
  }
  inst.depot = index[static_cast<std::size_t>(t.tour.front())];
  std::vector<int> open(index.begin(), index.end());
  std::vector<int> tour;
  for (int i : t.tour) tour.push_back(index[static_cast<std::size_t>(i)]);
  GridSolution sol = detail::make_solution(inst, open, tour);
  return {inst, sol};
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json instance_to_json(const GridInstance& inst) {
  return {{"m", inst.m},
          {"facility_cost", inst.facility_cost},
          {"outbound_rate", inst.outbound_rate},
          {"inbound_rate", inst.inbound_rate},
          {"metric", std::string(to_string(inst.metric))},
          {"depot", inst.depot}};
}

inline GridInstance instance_from_json(const nlohmann::json& j) {
  GridInstance inst;
  inst.m = j.at("m").get<int>();
  inst.facility_cost = j.at("facility_cost").get<double>();
  inst.outbound_rate = j.at("outbound_rate").get<double>();
  inst.inbound_rate = j.at("inbound_rate").get<double>();
  inst.metric = parse_metric(j.at("metric").get<std::string>());
  inst.depot = j.at("depot").get<int>();
  inst.validate();
  return inst;
}

inline nlohmann::json solution_to_json(const GridInstance& inst, const GridSolution& sol, const Metadata& meta = {}) {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : meta.entries) m[k] = v;
  return {{"meta", m},
          {"instance", instance_to_json(inst)},
          {"facilities", sol.facilities},
          {"assignment", sol.assignment},
          {"tour", sol.tour},
          {"objective",
           {{"facility", sol.objective.facility},
            {"outbound", sol.objective.outbound},
            {"inbound", sol.objective.inbound},
            {"total", sol.objective.total}}}};
}

inline std::pair<GridInstance, GridSolution> solution_from_json(const nlohmann::json& j) {
  try {
    const GridInstance inst = instance_from_json(j.at("instance"));
    GridSolution sol;
    sol.facilities = j.at("facilities").get<std::vector<int>>();
    sol.tour = j.at("tour").get<std::vector<int>>();
    sol.assignment = j.contains("assignment") ? j.at("assignment").get<std::vector<int>>()
                                              : nearest_assignment(inst, sol.facilities);
    sol.objective = evaluate(inst, sol);
    return {inst, sol};
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed grid solution JSON: ") + e.what());
  }
}

}  // namespace transship::grid
