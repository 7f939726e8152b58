#pragma once

// Headline designs assembled from the analytic kernel: the cyclic-hexagon
// upper bound, the n -> infinity lower bound, the exact L1 optimum, plus the
// comparison tables and parameter sweeps built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "transship/analytic.hpp"
#include "transship/format.hpp"
#include "transship/metric.hpp"
#include "transship/svg.hpp"

namespace transship {

/// Cyclic-polygon design (finite n) or the limit design (infinite n).
struct EuclideanDesign {
  DensityResult density;
  ShapeConfig shape;
  /// Distance between consecutive facilities along the tour, 2 R cos(alpha).
  double tour_spacing = 0.0;
};

/// Elongated L1 hexagon {|x| <= half_width, |x| + |y| <= apex}, tour along x.
struct L1Design {
  DensityResult density;
  double alpha = 0.0;
  double alpha_bar = 0.0;
  double corner_radius = 0.0;
  double half_width = 0.0;
  double apex = 0.0;
  double tour_spacing = 0.0;
};

inline EuclideanDesign cyclic_design(const SystemParams& params, int n) {
  params.validate();
  const double r = params.r();
  const CyclicOptimum opt = cyclic_optimum(n, r);
  // Inbound share needs R, which scales with sqrt(a); evaluate at unit area first.
  const double rho = cyclic_circumradius(n, opt.alpha, opt.alpha_bar, 1.0);
  const double inbound_coef = 2.0 * r * rho * std::cos(opt.alpha);
  EuclideanDesign d;
  d.density = z_from_g(params, opt.g, inbound_coef);
  const double R = rho * std::sqrt(d.density.area_per_facility);
  d.shape = ShapeConfig{Sides::finite(n), opt.alpha, opt.alpha_bar, R};
  d.tour_spacing = 2.0 * R * std::cos(opt.alpha);
  return d;
}

/// Cyclic-hexagon design; its cost is an upper bound on the Euclidean optimum.
inline EuclideanDesign euclidean_upper_bound(const SystemParams& params) { return cyclic_design(params, 6); }

/// Limit design: facilities evenly spaced on a straight tour, each region two
/// basic triangles (half angle alpha) plus two circular sectors of angle pi - 2 alpha.
inline EuclideanDesign euclidean_lower_bound(const SystemParams& params) {
  params.validate();
  const double r = params.r();
  const double alpha = alpha_star_limit(r);
  const double g = g_limit_at(r, alpha);
  const double rho = limit_radius(alpha, 1.0);
  EuclideanDesign d;
  d.density = z_from_g(params, g, 2.0 * r * rho * std::cos(alpha));
  const double R = rho * std::sqrt(d.density.area_per_facility);
  d.shape = ShapeConfig{Sides::infinite(), alpha, 0.0, R};
  d.tour_spacing = 2.0 * R * std::cos(alpha);
  return d;
}

inline L1Design l1_optimum(const SystemParams& params) {
  params.validate();
  const double r = params.r();
  L1Design d;
  d.alpha = alpha_star_l1(r);
  d.alpha_bar = (kPi - 2.0 * d.alpha) / 4.0;
  const double rho = l1_corner_radius(d.alpha, 1.0);
  d.density = z_from_g(params, g_bar_at(d.alpha), 2.0 * r * rho * std::cos(d.alpha));
  d.corner_radius = rho * std::sqrt(d.density.area_per_facility);
  d.half_width = d.corner_radius * std::cos(d.alpha);
  d.apex = d.corner_radius * (std::cos(d.alpha) + std::sin(d.alpha));
  d.tour_spacing = 2.0 * d.half_width;
  return d;
}

// ---------------------------------------------------------------------------
// Tables

struct SweepRow {
  std::string label;
  double r = 0.0;
  double alpha_deg = 0.0;
  double alpha_bar_deg = 0.0;
  double g_value = 0.0;
  double cost_total = 0.0;
  double area_per_facility = 0.0;
};

inline std::string shape_label(int n) {
  switch (n) {
    case 3: return "tri";
    case 4: return "quad";
    case 6: return "hex-ub";
    default: return "cyc-" + std::to_string(n);
  }
}

inline SweepRow row_of(std::string label, double r, const EuclideanDesign& d) {
  return SweepRow{std::move(label), r, to_degrees(d.shape.alpha), to_degrees(d.shape.alpha_bar),
                  d.density.g_value, d.density.cost.total, d.density.area_per_facility};
}

inline SweepRow row_of(std::string label, double r, const L1Design& d) {
  return SweepRow{std::move(label), r, to_degrees(d.alpha), to_degrees(d.alpha_bar),
                  d.density.g_value, d.density.cost.total, d.density.area_per_facility};
}

/// Optimal cyclic design for each n, followed by the infinite-n lower bound row.
inline std::vector<SweepRow> shape_comparison(const SystemParams& params, const std::vector<int>& n_list = {3, 4, 6}) {
  std::vector<SweepRow> rows;
  const double r = params.r();
  for (int n : n_list) rows.push_back(row_of(shape_label(n), r, cyclic_design(params, n)));
  rows.push_back(row_of("inf-lb", r, euclidean_lower_bound(params)));
  return rows;
}

/// `count` evenly spaced values on [lo, hi].
inline std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  g.back() = hi;
  return g;
}

/// r = 0 followed by 200 log-spaced points on [1e-3, 20].
inline std::vector<double> default_r_grid() {
  std::vector<double> g{0.0};
  const double l0 = std::log10(1e-3), l1 = std::log10(20.0);
  for (int i = 0; i < 200; ++i) g.push_back(std::pow(10.0, l0 + (l1 - l0) * i / 199.0));
  g.back() = 20.0;
  return g;
}

inline constexpr double kGapThreshold = 0.0035;

struct GapRow {
  double r = 0.0;
  double gap = 0.0;  // (g_limit / g_cyclic(6))^(2/3) - 1
};

struct GapTable {
  std::vector<GapRow> rows;
  double max_gap = 0.0;
  double argmax_r = 0.0;
  bool within_threshold = true;
};

/// Relative cost gap between the cyclic-hexagon upper bound and the limit lower bound.
inline double relative_gap(double r) { return std::pow(g_limit(r) / g_cyclic(6, r), 2.0 / 3.0) - 1.0; }

inline GapTable gap_analysis(const std::vector<double>& r_grid) {
  GapTable t;
  t.max_gap = -std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    if (!(r >= 0.0)) throw std::domain_error("gap_analysis needs r >= 0");
    const double gap = relative_gap(r);
    t.rows.push_back({r, gap});
    if (gap > t.max_gap) {
      t.max_gap = gap;
      t.argmax_r = r;
    }
  }
  t.within_threshold = t.rows.empty() || t.max_gap <= kGapThreshold;
  return t;
}

/// Rows for hex-ub, inf-lb and l1-opt at each r, ascending in r. With
/// `normalized` the costs use kappa = f = 1; otherwise the template's f, c,
/// lambda are kept and C is set to r c lambda.
inline std::vector<SweepRow> sensitivity_sweep(const SystemParams& templ, const std::vector<double>& r_values,
                                               bool normalized = true) {
  std::vector<double> rs = r_values;
  std::sort(rs.begin(), rs.end());
  std::vector<SweepRow> rows;
  rows.reserve(rs.size() * 3);
  for (double r : rs) {
    if (!(r >= 0.0)) throw std::domain_error("sensitivity_sweep needs r >= 0");
    SystemParams p = normalized ? SystemParams::normalized(r) : templ;
    if (!normalized) p.inbound_rate_C = r * p.outbound_rate_c * p.demand_density_lambda;
    rows.push_back(row_of("hex-ub", r, euclidean_upper_bound(p)));
    rows.push_back(row_of("inf-lb", r, euclidean_lower_bound(p)));
    rows.push_back(row_of("l1-opt", r, l1_optimum(p)));
  }
  return rows;
}

inline std::vector<SweepRow> sensitivity_sweep(const SystemParams& templ, double r_min, double r_max, int steps,
                                               bool normalized = true) {
  if (!(r_min >= 0.0 && r_min < r_max)) throw std::domain_error("sweep needs 0 <= r_min < r_max");
  if (steps < 2) throw std::domain_error("sweep needs steps >= 2");
  return sensitivity_sweep(templ, linear_grid(r_min, r_max, steps), normalized);
}

// ---------------------------------------------------------------------------
// Inventory

struct InventoryRow {
  double order_cost_b = 0.0;
  double holding_cost_h = 0.0;
  double r = 0.0;
  Metric metric = Metric::euclid;
  double cost_without = 0.0;
  double cost_with = 0.0;
  double area_without = 0.0;
  double area_with = 0.0;
  double pct_difference = 0.0;
};

/// Percentage increase of the optimal cost when EOQ inventory cost is added,
/// using the cyclic hexagon (Euclidean) or the elongated L1 hexagon.
inline std::vector<InventoryRow> inventory_comparison(const SystemParams& params,
                                                      const std::vector<InventoryParams>& inv_grid,
                                                      const std::vector<double>& r_grid) {
  if (inv_grid.empty() || r_grid.empty()) throw std::invalid_argument("inventory_comparison needs non-empty grids");
  std::vector<InventoryRow> rows;
  for (Metric m : {Metric::euclid, Metric::l1}) {
    for (const auto& inv : inv_grid) {
      for (double r : r_grid) {
        SystemParams p = params;
        p.inbound_rate_C = r * p.outbound_rate_c * p.demand_density_lambda;
        const double g = m == Metric::euclid ? g_cyclic(6, r) : g_bar(r);
        const DensityResult base = z_from_g(p, g);
        const DensityResult with = inventory_area_density(p, inv, g);
        rows.push_back(InventoryRow{inv.order_cost_b, inv.holding_cost_h, r, m, base.cost.total, with.cost.total,
                                    base.area_per_facility, with.area_per_facility,
                                    100.0 * (with.cost.total - base.cost.total) / base.cost.total});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Writers

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const Metadata& meta = {}) {
  meta.write_comment_block(os, "# ");
  os << "label,r,alpha_deg,alpha_bar_deg,g,cost,area_per_facility\n";
  for (const auto& row : rows) {
    os << row.label << ',' << format_number(row.r) << ',' << format_number(row.alpha_deg) << ','
       << format_number(row.alpha_bar_deg) << ',' << format_number(row.g_value) << ','
       << format_number(row.cost_total) << ',' << format_number(row.area_per_facility) << '\n';
  }
}

inline void write_inventory_csv(std::ostream& os, const std::vector<InventoryRow>& rows, const Metadata& meta = {}) {
  meta.write_comment_block(os, "# ");
  os << "metric,b,h,r,cost_without,cost_with,area_without,area_with,pct_difference\n";
  for (const auto& row : rows) {
    os << to_string(row.metric) << ',' << format_number(row.order_cost_b) << ',' << format_number(row.holding_cost_h)
       << ',' << format_number(row.r) << ',' << format_number(row.cost_without) << ','
       << format_number(row.cost_with) << ',' << format_number(row.area_without) << ','
       << format_number(row.area_with) << ',' << format_number(row.pct_difference) << '\n';
  }
}

enum class PlotQuantity { cost, alpha };

/// Line chart of one quantity against r, one polyline per label (labels in first-seen order).
inline void write_sweep_svg(std::ostream& os, const std::vector<SweepRow>& rows, PlotQuantity what = PlotQuantity::cost,
                            const Metadata& meta = {}) {
  std::vector<std::string> labels;
  std::map<std::string, std::vector<svg::Point>> series;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& row : rows) {
    if (!series.count(row.label)) labels.push_back(row.label);
    const double y = what == PlotQuantity::cost ? row.cost_total : row.alpha_deg;
    series[row.label].push_back({row.r, y});
    x0 = std::min(x0, row.r);
    x1 = std::max(x1, row.r);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (rows.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  auto doc = svg::Document::chart(x0, y0 - pad, x1, y1 + pad, 800.0, 500.0, 60.0);
  for (const auto& [k, v] : meta.entries) doc.comment(k + " = " + v);
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const double left = 60.0, bottom = doc.height() - 60.0, right = doc.width() - 60.0;
  doc.line_px(left, bottom, right, bottom, "stroke:black;stroke-width:1");
  doc.line_px(left, bottom, left, 60.0, "stroke:black;stroke-width:1");
  doc.text_px(right - 20.0, bottom + 30.0, "r");
  doc.text_px(10.0, 40.0, what == PlotQuantity::cost ? "cost" : "alpha (deg)");
  doc.text_px(left, bottom + 18.0, format_number(x0, 4));
  doc.text_px(right - 30.0, bottom + 18.0, format_number(x1, 4));
  doc.text_px(5.0, bottom, format_number(y0 - pad, 4));
  doc.text_px(5.0, 65.0, format_number(y1 + pad, 4));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string color = colors[i % 6];
    doc.polyline(series[labels[i]], "fill:none;stroke:" + color + ";stroke-width:1.5", labels[i]);
    doc.text_px(right - 80.0, 80.0 + 16.0 * static_cast<double>(i), labels[i], "font-size:12px;fill:" + color);
  }
  doc.write(os);
}

}  // namespace transship
