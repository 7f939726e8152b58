#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "transship/bounds.hpp"

using namespace transship;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double cost_of(double kappa, double f, double g) { return 3.0 * std::cbrt(kappa * kappa * f * f * f / (4.0 * g * g)); }

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(UpperBound, RegularHexagonWithoutInbound) {
  const auto d = euclidean_upper_bound(SystemParams::normalized(0.0));
  EXPECT_NEAR(to_degrees(d.shape.alpha), 30.0, 1e-9);
  EXPECT_NEAR(to_degrees(d.shape.alpha_bar), 30.0, 1e-9);
  EXPECT_NEAR(d.density.g_value, g_regular(6), 1e-10);
  EXPECT_NEAR(d.density.cost.total, 0.98661234, 1e-8);
  EXPECT_NO_THROW(d.shape.validate());
}

TEST(UpperBound, UnitCostsAtROne) {
  const auto d = euclidean_upper_bound(SystemParams::normalized(1.0));
  EXPECT_NEAR(d.density.cost.total, 1.92523626, 1e-8);
  EXPECT_NEAR(d.density.cost.total, cost_of(1.0, 1.0, g_cyclic(6, 1.0)), 1e-12);
  EXPECT_NEAR(d.density.area_per_facility, std::pow(0.5, -2.0 / 3.0) * std::pow(g_cyclic(6, 1.0), 2.0 / 3.0), 1e-12);
}

TEST(UpperBound, ComponentsFollowTheGeometry) {
  // Inbound per area is C times the tour length through one region, 2 R cos(alpha);
  // outbound is c lambda times the mean distance of the region at that area.
  for (double r : {0.3, 1.0, 4.0}) {
    const SystemParams p{1.7, 0.8, 1.3, r * 0.8 * 1.3};
    const auto d = euclidean_upper_bound(p);
    EXPECT_LT(rel(d.density.cost.inbound, p.inbound_rate_C * d.tour_spacing), 1e-12);
    EXPECT_NEAR(d.tour_spacing, 2.0 * d.shape.circumradius * std::cos(d.shape.alpha), 1e-14);
    EXPECT_LT(rel(d.density.cost.facility, p.facility_cost_f / d.density.area_per_facility), 1e-14);
    EXPECT_LT(rel(d.density.cost.facility, d.density.cost.total / 3.0), 1e-12);
    const double a = d.density.area_per_facility;
    const double mean_unit = oracle::cyclic_transport(6, 0.0, d.shape.alpha);
    EXPECT_LT(rel(d.density.cost.outbound, p.outbound_rate_c * p.demand_density_lambda * mean_unit * std::sqrt(a)),
              1e-9);
  }
}

TEST(UpperBound, CostIncreasingAndConcaveInR) {
  std::vector<double> z;
  for (int k = 0; k <= 200; ++k) z.push_back(euclidean_upper_bound(SystemParams::normalized(0.1 * k)).density.cost.total);
  for (std::size_t k = 1; k < z.size(); ++k) EXPECT_GT(z[k], z[k - 1]);
  for (std::size_t k = 2; k < z.size(); ++k) EXPECT_LT(z[k] - 2.0 * z[k - 1] + z[k - 2], 0.0) << k;
}

TEST(LowerBound, CircleAtZeroAndBelowUpperBound) {
  const auto lb0 = euclidean_lower_bound(SystemParams::normalized(0.0));
  EXPECT_NEAR(lb0.density.cost.total, cost_of(1.0, 1.0, 3.0 * std::sqrt(kPi) / 2.0), 1e-12);
  for (int k = 0; k <= 2000; ++k) {
    const auto p = SystemParams::normalized(0.01 * k);
    EXPECT_LT(euclidean_lower_bound(p).density.cost.total, euclidean_upper_bound(p).density.cost.total) << 0.01 * k;
  }
  EXPECT_NEAR(relative_gap(0.0), 0.0018962, 1e-6);
  EXPECT_NEAR(relative_gap(1.0), 1.16e-6, 1e-8);
}

TEST(LowerBound, InboundShareMatchesTourSpacing) {
  const SystemParams p{1.0, 1.0, 1.0, 2.0};
  const auto d = euclidean_lower_bound(p);
  EXPECT_LT(rel(d.density.cost.inbound, 2.0 * d.tour_spacing), 1e-12);
  EXPECT_TRUE(d.shape.sides.is_infinite());
  EXPECT_NO_THROW(d.shape.validate());
}

TEST(L1Optimum, SquareAtZeroAndReferenceAtOne) {
  const auto d0 = l1_optimum(SystemParams::normalized(0.0));
  EXPECT_NEAR(d0.density.cost.total, 3.0 * std::cbrt(1.0 / 18.0), 1e-12);
  EXPECT_NEAR(to_degrees(d0.alpha_bar), 45.0, 1e-12);
  EXPECT_NEAR(d0.half_width, d0.apex, 1e-12);
  const auto d1 = l1_optimum(SystemParams::normalized(1.0));
  EXPECT_NEAR(d1.density.g_value, 0.8959317812, 1e-9);
  EXPECT_NEAR(d1.density.cost.total, cost_of(1.0, 1.0, 0.8959317812), 1e-9);
  EXPECT_LT(rel(d1.density.cost.inbound, 1.0 * d1.tour_spacing), 1e-12);
}

TEST(L1Optimum, AboveEuclideanWithShrinkingDifference) {
  double prev = INFINITY;
  for (double r : linear_grid(0.0, 20.0, 200)) {
    const auto p = SystemParams::normalized(r);
    const double ratio = l1_optimum(p).density.cost.total / euclidean_upper_bound(p).density.cost.total;
    EXPECT_GT(ratio, 1.0) << r;
    EXPECT_LT(ratio, prev) << r;
    prev = ratio;
  }
}

TEST(ShapeComparison, HexagonBestAndSpreadsShrink) {
  for (double r : default_r_grid()) {
    const auto rows = shape_comparison(SystemParams::normalized(r));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].label, "tri");
    EXPECT_EQ(rows[2].label, "hex-ub");
    EXPECT_EQ(rows[3].label, "inf-lb");
    EXPECT_GE(rows[0].cost_total, rows[1].cost_total);
    EXPECT_GE(rows[1].cost_total, rows[2].cost_total);
    EXPECT_GE(rows[2].cost_total, rows[3].cost_total);
    // The triangle's angle is further from the limit than the hexagon's.
    EXPECT_GE(std::abs(rows[0].alpha_deg - rows[3].alpha_deg) + 1e-9, std::abs(rows[2].alpha_deg - rows[3].alpha_deg));
  }
  auto spread = [](double r) {
    const auto rows = shape_comparison(SystemParams::normalized(r));
    return rows[2].alpha_deg - rows[0].alpha_deg;
  };
  EXPECT_GT(std::abs(spread(0.1)), std::abs(spread(10.0)));
  const auto r0 = shape_comparison(SystemParams::normalized(0.0));
  EXPECT_NEAR(r0[0].g_value, g_regular(3), 1e-10);
  EXPECT_NEAR(r0[1].g_value, g_regular(4), 1e-10);
  EXPECT_NEAR(r0[2].g_value, g_regular(6), 1e-10);
}

TEST(GapAnalysis, MaximumWithinThreshold) {
  const auto t = gap_analysis(linear_grid(0.0, 20.0, 200));
  EXPECT_TRUE(t.within_threshold);
  EXPECT_GT(t.max_gap, 0.0);
  EXPECT_LE(t.max_gap, kGapThreshold);
  EXPECT_EQ(t.argmax_r, 0.0);
  for (const auto& row : t.rows) EXPECT_GT(row.gap, 0.0);
  EXPECT_THROW(gap_analysis({-1.0}), std::domain_error);
}

TEST(Sweep, RowsAnglesAndLimits) {
  const auto rows = sensitivity_sweep(SystemParams::normalized(0.0), 0.0, 20.0, 50);
  ASSERT_EQ(rows.size(), 150u);
  std::map<std::string, double> prev_alpha, prev_r;
  for (const auto& row : rows) {
    if (prev_r.count(row.label)) {
      EXPECT_GT(row.r, prev_r[row.label]);
      EXPECT_GE(row.alpha_deg, prev_alpha[row.label]);
    }
    prev_r[row.label] = row.r;
    prev_alpha[row.label] = row.alpha_deg;
    if (row.label == "hex-ub") EXPECT_NEAR(4.0 * row.alpha_bar_deg + 2.0 * row.alpha_deg, 180.0, 1e-9);
    if (row.label == "l1-opt") EXPECT_NEAR(4.0 * row.alpha_bar_deg + 2.0 * row.alpha_deg, 180.0, 1e-9);
  }
  EXPECT_NEAR(rows[0].alpha_deg, 30.0, 1e-9);
  EXPECT_EQ(rows[2].label, "l1-opt");
  EXPECT_NEAR(rows[2].alpha_deg, 0.0, 1e-12);
  for (const auto& row : rows)
    if (row.r == 20.0) {
      EXPECT_GT(row.alpha_deg, 89.0) << row.label;
      EXPECT_LT(row.alpha_bar_deg, 0.5) << row.label;
    }
  EXPECT_THROW(sensitivity_sweep(SystemParams::normalized(0.0), 1.0, 0.5, 10), std::domain_error);
  EXPECT_THROW(sensitivity_sweep(SystemParams::normalized(0.0), 0.0, 1.0, 1), std::domain_error);
}

TEST(Sweep, ScaleLaw) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int k = 0; k < 25; ++k) {
    const double f = u(gen), c = u(gen), lambda = u(gen), r = u(gen) - 0.2;
    const SystemParams p{f, c, lambda, r * c * lambda};
    const double kappa = p.kappa();
    const auto unit = SystemParams::normalized(r);
    auto check = [&](const DensityResult& a, const DensityResult& b) {
      EXPECT_LT(rel(a.cost.total, std::pow(kappa, 2.0 / 3.0) * f * b.cost.total), 1e-12);
      EXPECT_LT(rel(a.area_per_facility, std::pow(kappa, -2.0 / 3.0) * b.area_per_facility), 1e-12);
    };
    check(euclidean_upper_bound(p).density, euclidean_upper_bound(unit).density);
    check(euclidean_lower_bound(p).density, euclidean_lower_bound(unit).density);
    check(l1_optimum(p).density, l1_optimum(unit).density);
  }
}

TEST(Sweep, RawModeKeepsTemplateCosts) {
  const SystemParams t{8.0, 1.0, 1.0, 0.0};
  const auto rows = sensitivity_sweep(t, {1.0}, false);
  EXPECT_NEAR(rows[0].cost_total, euclidean_upper_bound(SystemParams{8.0, 1.0, 1.0, 1.0}).density.cost.total, 1e-12);
}

TEST(Inventory, ZeroInventoryMeansNoDifference) {
  const auto rows = inventory_comparison(SystemParams::normalized(0.0), {{0.0, 0.0}, {0.0, 5.0}}, {0.0, 1.0, 10.0});
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& row : rows) EXPECT_EQ(row.pct_difference, 0.0);
}

TEST(Inventory, DifferenceShrinksWithRAndGrowsWithBh) {
  std::vector<InventoryParams> inv;
  for (int i = 1; i <= 10; ++i) inv.push_back({0.5 * i, 1.0});
  const auto rs = linear_grid(0.0, 10.0, 10);
  const auto rows = inventory_comparison(SystemParams::normalized(0.0), inv, rs);
  ASSERT_EQ(rows.size(), 200u);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t i = 0; i < inv.size(); ++i) {
      for (std::size_t k = 0; k < rs.size(); ++k) {
        const auto& row = rows[m * 100 + i * 10 + k];
        EXPECT_GT(row.pct_difference, 0.0);
        if (k > 0) EXPECT_LT(row.pct_difference, rows[m * 100 + i * 10 + k - 1].pct_difference);
        if (i > 0) EXPECT_GT(row.pct_difference, rows[m * 100 + (i - 1) * 10 + k].pct_difference);
      }
    }
  }
}

TEST(Writers, CsvLayoutAndDeterminism) {
  Metadata meta;
  meta.add("tool", "transship test").add("steps", "5");
  const auto rows = sensitivity_sweep(SystemParams::normalized(0.0), 0.0, 2.0, 5);
  std::ostringstream a, b;
  write_sweep_csv(a, rows, meta);
  write_sweep_csv(b, rows, meta);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# tool = transship test");
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "label,r,alpha_deg,alpha_bar_deg,g,cost,area_per_facility");
  std::size_t data = 0;
  while (std::getline(in, line)) ++data;
  EXPECT_EQ(data, 15u);
  EXPECT_NE(a.str().find("hex-ub,0,30,30,2.65113641218,"), std::string::npos);
}

TEST(Writers, SvgHasOnePolylinePerLabel) {
  const auto rows = sensitivity_sweep(SystemParams::normalized(0.0), 0.0, 5.0, 20);
  std::ostringstream os;
  write_sweep_svg(os, rows, PlotQuantity::alpha);
  const std::string s = os.str();
  EXPECT_EQ(count_of(s, "<polyline"), 3u);
  for (const char* id : {"id=\"hex-ub\"", "id=\"inf-lb\"", "id=\"l1-opt\""}) EXPECT_NE(s.find(id), std::string::npos);
  EXPECT_EQ(s.rfind("<?xml", 0), 0u);
}
