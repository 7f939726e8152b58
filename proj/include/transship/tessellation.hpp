#pragma once

// Explicit finite windows of the optimal tessellations and their numerical
// verification.
//
// Layout: facilities sit on rows parallel to the x axis (the tour axis). Row j
// has facilities at x = 2 d i + (j odd ? d : 0), y = j h, where d is the half
// tour spacing. Regions are hexagons with two vertical sides at x = +-d
// (crossed by the tour). Adjacent rows interlock through the slanted sides:
//   Euclidean: cyclic hexagon, vertices at angles +-alpha, pi/2, pi -+ alpha,
//              3pi/2 on the circumcircle; h = R (1 + sin alpha).
//   L1:        {|x| <= d, |x| + |y| <= S}; h = 2 S - d.
// The tour runs straight along each row and snakes row to row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "transship/analytic.hpp"
#include "transship/bounds.hpp"
#include "transship/format.hpp"
#include "transship/geometry.hpp"
#include "transship/metric.hpp"
#include "transship/sampling.hpp"
#include "transship/svg.hpp"

namespace transship {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tessellation {
  Metric metric = Metric::euclid;
  int rows = 0;
  int cols = 0;
  std::vector<geom::Point> facilities;  // index = row * cols + col
  std::vector<geom::Polygon> regions;   // counterclockwise
  std::vector<int> tour;                // facility indices in visiting order
  std::vector<double> tour_lengths;     // l_i per facility index
  geom::Box window;

  // Design the block was built from.
  double alpha = 0.0;
  double alpha_bar = 0.0;
  double area_per_facility = 0.0;
  double half_spacing = 0.0;  // d
  double row_pitch = 0.0;     // h

  std::size_t size() const { return facilities.size(); }

  /// Interior = not in the outer ring of rows/columns.
  bool is_interior(std::size_t i) const {
    const int row = static_cast<int>(i) / cols, col = static_cast<int>(i) % cols;
    return row >= 1 && row <= rows - 2 && col >= 1 && col <= cols - 2;
  }

  std::vector<std::size_t> interior_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (is_interior(i)) out.push_back(i);
    return out;
  }

  /// Bounding box of the interior facilities; empty when there are none.
  geom::Box interior_window() const {
    const auto idx = interior_indices();
    if (idx.empty()) return geom::Box{};
    geom::Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (auto i : idx) {
      b.x0 = std::min(b.x0, facilities[i].x);
      b.y0 = std::min(b.y0, facilities[i].y);
      b.x1 = std::max(b.x1, facilities[i].x);
      b.y1 = std::max(b.y1, facilities[i].y);
    }
    return b;
  }
};

namespace detail {

inline std::vector<int> boustrophedon(int rows, int cols) {
  std::vector<int> tour;
  for (int j = 0; j < rows; ++j) {
    for (int k = 0; k < cols; ++k) {
      const int i = (j % 2 == 0) ? k : cols - 1 - k;
      tour.push_back(j * cols + i);
    }
  }
  return tour;
}

// l_i = (|x_i - x_prev| + |x_i - x_next|) / 2 along the closed tour.
inline std::vector<double> tour_segment_lengths(const std::vector<geom::Point>& pts, const std::vector<int>& tour) {
  std::vector<double> l(pts.size(), 0.0);
  const std::size_t n = tour.size();
  if (n < 2) return l;
  for (std::size_t k = 0; k < n; ++k) {
    const auto prev = pts[tour[(k + n - 1) % n]], cur = pts[tour[k]], next = pts[tour[(k + 1) % n]];
    l[tour[k]] = 0.5 * (geom::norm(cur - prev) + geom::norm(cur - next));
  }
  return l;
}

inline Tessellation build_block(Metric metric, int rows, int cols, double d, double h,
                                const std::vector<geom::Point>& cell_template) {
  if (rows < 1 || cols < 1) throw std::domain_error("tessellation needs rows, cols >= 1");
  Tessellation t;
  t.metric = metric;
  t.rows = rows;
  t.cols = cols;
  t.half_spacing = d;
  t.row_pitch = h;
  const double eps = 1e-12 * std::max(d, h);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const geom::Point c{2.0 * d * i + (j % 2 ? d : 0.0), h * j};
      t.facilities.push_back(c);
      geom::Polygon poly;
      for (const auto& v : cell_template) poly.push_back(c + v);
      t.regions.push_back(geom::dedupe(poly, eps));
    }
  }
  t.tour = boustrophedon(rows, cols);
  t.tour_lengths = tour_segment_lengths(t.facilities, t.tour);
  t.window = geom::bounding_box(t.regions.front());
  for (const auto& reg : t.regions) {
    const auto b = geom::bounding_box(reg);
    t.window.x0 = std::min(t.window.x0, b.x0);
    t.window.y0 = std::min(t.window.y0, b.y0);
    t.window.x1 = std::max(t.window.x1, b.x1);
    t.window.y1 = std::max(t.window.y1, b.y1);
  }
  return t;
}

}  // namespace detail

/// Block of identical cyclic hexagons at the upper-bound design.
inline Tessellation build_euclidean(const SystemParams& params, int rows, int cols) {
  const EuclideanDesign design = euclidean_upper_bound(params);
  const double R = design.shape.circumradius;
  const double a = design.shape.alpha;
  const double d = R * std::cos(a), s = R * std::sin(a);
  const std::vector<geom::Point> cell{{d, -s}, {d, s}, {0.0, R}, {-d, s}, {-d, -s}, {0.0, -R}};
  Tessellation t = detail::build_block(Metric::euclid, rows, cols, d, R * (1.0 + std::sin(a)), cell);
  t.alpha = a;
  t.alpha_bar = design.shape.alpha_bar;
  t.area_per_facility = design.density.area_per_facility;
  return t;
}

/// Block of elongated L1 hexagons at the exact L1 optimum (squares when r = 0).
inline Tessellation build_l1(const SystemParams& params, int rows, int cols) {
  const L1Design design = l1_optimum(params);
  const double d = design.half_width, S = design.apex;
  const std::vector<geom::Point> cell{{d, -(S - d)}, {d, S - d}, {0.0, S}, {-d, S - d}, {-d, -(S - d)}, {0.0, -S}};
  Tessellation t = detail::build_block(Metric::l1, rows, cols, d, 2.0 * S - d, cell);
  t.alpha = design.alpha;
  t.alpha_bar = design.alpha_bar;
  t.area_per_facility = design.density.area_per_facility;
  return t;
}

inline Tessellation build_tessellation(Metric metric, const SystemParams& params, int rows, int cols) {
  return metric == Metric::euclid ? build_euclidean(params, rows, cols) : build_l1(params, rows, cols);
}

// ---------------------------------------------------------------------------
// Measurement

struct RegionAngles {
  double alpha = 0.0;      // mean half basic angle of the tour-crossed sides
  double alpha_bar = 0.0;  // mean half basic angle of the remaining sides
  int sides = 0;
  bool ok = false;         // false when a tour neighbor's ray did not hit a distinct side
};

/// Half basic angles of region i split into tour-crossed sides and the rest.
inline RegionAngles measure_region(const Tessellation& t, std::size_t i) {
  RegionAngles out;
  const auto& poly = t.regions[i];
  const auto angles = geom::half_basic_angles(poly, t.facilities[i]);
  out.sides = static_cast<int>(poly.size());
  const auto pos = std::find(t.tour.begin(), t.tour.end(), static_cast<int>(i)) - t.tour.begin();
  const std::size_t n = t.tour.size();
  if (n < 3) return out;
  const int prev = t.tour[(pos + n - 1) % n], next = t.tour[(pos + 1) % n];
  const int e1 = geom::edge_hit_by_ray(poly, t.facilities[i], t.facilities[prev] - t.facilities[i]);
  const int e2 = geom::edge_hit_by_ray(poly, t.facilities[i], t.facilities[next] - t.facilities[i]);
  if (e1 < 0 || e2 < 0 || e1 == e2) return out;
  double rest = 0.0;
  for (std::size_t k = 0; k < angles.size(); ++k)
    if (static_cast<int>(k) != e1 && static_cast<int>(k) != e2) rest += angles[k];
  out.alpha = 0.5 * (angles[e1] + angles[e2]);
  out.alpha_bar = angles.size() > 2 ? rest / static_cast<double>(angles.size() - 2) : 0.0;
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Verification

struct PartitionReport {
  std::uint64_t samples_used = 0;
  std::uint64_t uncovered = 0;    // point in no region
  std::uint64_t overlapping = 0;  // point in more than one region
  std::uint64_t wrong_owner = 0;  // region's facility is not a metric-nearest facility
  geom::Box window;

  std::uint64_t violations() const { return uncovered + overlapping + wrong_owner; }
  bool valid() const { return violations() == 0; }
};

namespace detail {

inline std::size_t nearest_facility(const Tessellation& t, geom::Point p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double dk = distance(t.metric, p.x - t.facilities[k].x, p.y - t.facilities[k].y);
    if (dk < best_d) {
      best_d = dk;
      best = k;
    }
  }
  return best;
}

}  // namespace detail

/// Uniform samples over the interior window: every point must lie in exactly
/// one region whose facility is a metric-nearest facility.
inline PartitionReport validate_partition(const Tessellation& t, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::domain_error("validate_partition needs samples >= 1");
  PartitionReport report;
  report.window = t.interior_window();
  if (report.window.empty()) return report;
  std::vector<geom::Box> boxes;
  for (const auto& reg : t.regions) boxes.push_back(geom::bounding_box(reg));
  const double scale = std::max(t.half_spacing, t.row_pitch);
  const double tol = 1e-9 * scale;
  const CounterRng rng(seed);
  const geom::Box w = report.window;
  auto shards = run_shards<PartitionReport>(samples, [&](int, std::uint64_t begin, std::uint64_t end) {
    PartitionReport part;
    for (std::uint64_t s = begin; s < end; ++s) {
      const geom::Point p{w.x0 + w.width() * rng.uniform(s, 0), w.y0 + w.height() * rng.uniform(s, 1)};
      int hits = 0;
      std::size_t owner = 0;
      for (std::size_t k = 0; k < t.regions.size(); ++k) {
        if (!boxes[k].contains(p, tol)) continue;
        // Strict interior test: boundary points (measure zero) never count twice.
        if (geom::contains(t.regions[k], p, -tol)) {
          ++hits;
          owner = k;
        }
      }
      ++part.samples_used;
      if (hits == 0) {
        // Only a violation if the point is not on a shared boundary.
        bool near_edge = false;
        for (std::size_t k = 0; k < t.regions.size() && !near_edge; ++k)
          near_edge = boxes[k].contains(p, tol) && geom::contains(t.regions[k], p, tol);
        if (!near_edge) ++part.uncovered;
        continue;
      }
      if (hits > 1) {
        ++part.overlapping;
        continue;
      }
      const std::size_t nearest = detail::nearest_facility(t, p);
      if (nearest != owner) {
        const double d_owner = distance(t.metric, p.x - t.facilities[owner].x, p.y - t.facilities[owner].y);
        const double d_near = distance(t.metric, p.x - t.facilities[nearest].x, p.y - t.facilities[nearest].y);
        if (d_owner - d_near > tol) ++part.wrong_owner;
      }
    }
    return part;
  });
  for (const auto& part : shards) {
    report.samples_used += part.samples_used;
    report.uncovered += part.uncovered;
    report.overlapping += part.overlapping;
    report.wrong_owner += part.wrong_owner;
  }
  return report;
}

struct MonteCarloCost {
  CostBreakdown cost;
  double outbound_stderr = 0.0;  // standard error of the outbound estimate
  std::uint64_t samples = 0;
  std::size_t interior_facilities = 0;
  double interior_area = 0.0;
};

/// Direct numerical evaluation of the per-area objective on the interior
/// regions: points uniform over their union, owner by nearest facility.
inline MonteCarloCost monte_carlo_cost(const Tessellation& t, const SystemParams& params, std::uint64_t samples,
                                       std::uint64_t seed) {
  params.validate();
  if (samples < 10000) throw std::domain_error("monte_carlo_cost needs at least 1e4 samples");
  const auto interior = t.interior_indices();
  if (interior.empty()) throw std::domain_error("monte_carlo_cost needs at least one interior region");
  MonteCarloCost out;
  out.samples = samples;
  out.interior_facilities = interior.size();
  double tour = 0.0;
  for (auto i : interior) {
    out.interior_area += geom::area(t.regions[i]);
    tour += t.tour_lengths[i];
  }
  // Area-weighted region choice via cumulative areas.
  std::vector<double> cum;
  double acc = 0.0;
  for (auto i : interior) cum.push_back(acc += geom::area(t.regions[i]));
  const CounterRng rng(seed);
  struct Partial {
    double sum = 0.0, sum_sq = 0.0;
  };
  auto shards = run_shards<Partial>(samples, [&](int, std::uint64_t begin, std::uint64_t end) {
    Partial part;
    for (std::uint64_t s = begin; s < end; ++s) {
      const double pick = rng.uniform(s, 0) * acc;
      const std::size_t k = std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin(),
                                                  interior.size() - 1);
      const auto& poly = t.regions[interior[k]];
      const geom::Box b = geom::bounding_box(poly);
      geom::Point p{};
      for (std::uint64_t attempt = 0;; ++attempt) {
        p = {b.x0 + b.width() * rng.uniform(s, 2 + 2 * attempt), b.y0 + b.height() * rng.uniform(s, 3 + 2 * attempt)};
        if (geom::contains(poly, p, 0.0)) break;
      }
      const auto owner = detail::nearest_facility(t, p);
      const double dist = distance(t.metric, p.x - t.facilities[owner].x, p.y - t.facilities[owner].y);
      part.sum += dist;
      part.sum_sq += dist * dist;
    }
    return part;
  });
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& part : shards) {
    sum += part.sum;
    sum_sq += part.sum_sq;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  const double kf = params.kappa() * params.facility_cost_f;
  const double facility = params.facility_cost_f * static_cast<double>(interior.size()) / out.interior_area;
  const double inbound = kf * params.r() * tour / static_cast<double>(interior.size());
  out.cost = CostBreakdown::of(facility, kf * mean, inbound);
  out.outbound_stderr = kf * std::sqrt(var / n);
  return out;
}

// ---------------------------------------------------------------------------
// Export / import

inline void write_tessellation_svg(std::ostream& os, const Tessellation& t, const Metadata& meta = {}) {
  const double pad = 0.02 * std::max(t.window.width(), t.window.height());
  svg::Document doc(t.window.x0 - pad, t.window.y0 - pad, t.window.x1 + pad, t.window.y1 + pad, 800.0, 20.0);
  for (const auto& [k, v] : meta.entries) doc.comment(k + " = " + v);
  for (std::size_t i = 0; i < t.regions.size(); ++i) {
    std::vector<svg::Point> pts;
    for (const auto& p : t.regions[i]) pts.push_back({p.x, p.y});
    doc.polygon(pts, t.is_interior(i) ? "fill:#dbe9f6;stroke:#1f3b5a;stroke-width:1"
                                      : "fill:#f2f2f2;stroke:#1f3b5a;stroke-width:1");
  }
  std::vector<svg::Point> route;
  for (int i : t.tour) route.push_back({t.facilities[i].x, t.facilities[i].y});
  if (!route.empty()) route.push_back(route.front());
  doc.polyline(route, "fill:none;stroke:#d62728;stroke-width:1.5", "tour");
  for (const auto& f : t.facilities) doc.circle({f.x, f.y}, 2.5, "fill:black");
  doc.write(os);
}

namespace detail {

inline double round12(double v) { return std::stod(format_number(v, 12)); }

inline nlohmann::json point_json(geom::Point p) { return nlohmann::json::array({round12(p.x), round12(p.y)}); }

inline nlohmann::json meta_json(const Metadata& meta) {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : meta.entries) m[k] = v;
  return m;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// {metric, facilities, regions, tour, window} plus rows/cols and a meta block.
inline nlohmann::json tessellation_to_json(const Tessellation& t, const Metadata& meta = {}) {
  using nlohmann::json;
  json j;
  j["meta"] = detail::meta_json(meta);
  j["metric"] = std::string(to_string(t.metric));
  j["rows"] = t.rows;
  j["cols"] = t.cols;
  json fac = json::array();
  for (const auto& p : t.facilities) fac.push_back(detail::point_json(p));
  j["facilities"] = fac;
  json regs = json::array();
  for (const auto& reg : t.regions) {
    json poly = json::array();
    for (const auto& p : reg) poly.push_back(detail::point_json(p));
    regs.push_back(poly);
  }
  j["regions"] = regs;
  j["tour"] = t.tour;
  j["window"] = {detail::round12(t.window.x0), detail::round12(t.window.y0), detail::round12(t.window.x1),
                 detail::round12(t.window.y1)};
  j["design"] = {{"alpha", detail::round12(t.alpha)},
                 {"alpha_bar", detail::round12(t.alpha_bar)},
                 {"area_per_facility", detail::round12(t.area_per_facility)},
                 {"half_spacing", detail::round12(t.half_spacing)},
                 {"row_pitch", detail::round12(t.row_pitch)}};
  return j;
}

inline Tessellation tessellation_from_json(const nlohmann::json& j) {
  Tessellation t;
  try {
    t.metric = parse_metric(j.at("metric").get<std::string>());
    t.rows = j.value("rows", 0);
    t.cols = j.value("cols", 0);
    for (const auto& p : j.at("facilities")) t.facilities.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& reg : j.at("regions")) {
      geom::Polygon poly;
      for (const auto& p : reg) poly.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      t.regions.push_back(poly);
    }
    t.tour = j.at("tour").get<std::vector<int>>();
    const auto w = j.at("window");
    t.window = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(), w.at(3).get<double>()};
    if (j.contains("design")) {
      const auto& d = j.at("design");
      t.alpha = d.value("alpha", 0.0);
      t.alpha_bar = d.value("alpha_bar", 0.0);
      t.area_per_facility = d.value("area_per_facility", 0.0);
      t.half_spacing = d.value("half_spacing", 0.0);
      t.row_pitch = d.value("row_pitch", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed tessellation JSON: ") + e.what());
  }
  if (t.rows * t.cols != static_cast<int>(t.facilities.size())) {
    t.rows = 1;
    t.cols = static_cast<int>(t.facilities.size());
  }
  if (t.regions.size() != t.facilities.size()) throw std::invalid_argument("region count differs from facility count");
  t.tour_lengths = detail::tour_segment_lengths(t.facilities, t.tour);
  return t;
}

enum class GeometryFormat { svg, json };

inline void export_geometry(const Tessellation& t, GeometryFormat format, const std::filesystem::path& path,
                            const Metadata& meta = {}) {
  std::ostringstream os;
  if (format == GeometryFormat::svg) {
    write_tessellation_svg(os, t, meta);
  } else {
    os << tessellation_to_json(t, meta).dump(1) << '\n';
  }
  detail::write_file(path, os.str());
}

inline Tessellation import_geometry_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse '" + path.string() + "': " + e.what());
  }
  return tessellation_from_json(j);
}

}  // namespace transship
