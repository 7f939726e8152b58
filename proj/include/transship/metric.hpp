#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace transship {

enum class Metric { euclid, l1 };

inline std::string_view to_string(Metric m) { return m == Metric::euclid ? "euclid" : "l1"; }

inline Metric parse_metric(std::string_view s) {
  if (s == "euclid" || s == "euclidean" || s == "l2") return Metric::euclid;
  if (s == "l1" || s == "rectilinear" || s == "manhattan") return Metric::l1;
  throw std::invalid_argument("unknown metric '" + std::string(s) + "' (expected euclid or l1)");
}

inline double distance(Metric m, double dx, double dy) {
  return m == Metric::euclid ? std::sqrt(dx * dx + dy * dy) : std::abs(dx) + std::abs(dy);
}

}  // namespace transship
