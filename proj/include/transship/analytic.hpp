#pragma once

// Closed-form kernel: cost coefficients, optimal basic angles and optimal
// facility densities for transshipment layouts on a homogeneous plane.
//
// All angles are radians. The cost model is per unit area-time:
//
//   z(a) = f / a + kappa * f * sqrt(a) / g
//
// where a = A/N is the area served by one facility and g is the dimensionless
// shape coefficient of the service region (larger g is a better shape).

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace transship {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

inline double to_degrees(double rad) { return rad * 180.0 / kPi; }
inline double to_radians(double deg) { return deg * kPi / 180.0; }

/// Cost rates of the system. kappa = c*lambda/f, r = C/(c*lambda).
struct SystemParams {
  double facility_cost_f = 1.0;
  double outbound_rate_c = 1.0;
  double demand_density_lambda = 1.0;
  double inbound_rate_C = 0.0;

  double kappa() const { return outbound_rate_c * demand_density_lambda / facility_cost_f; }
  double r() const { return inbound_rate_C / (outbound_rate_c * demand_density_lambda); }

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(facility_cost_f)) throw std::domain_error("facility cost f must be positive and finite");
    if (!positive(outbound_rate_c)) throw std::domain_error("outbound rate c must be positive and finite");
    if (!positive(demand_density_lambda)) throw std::domain_error("demand density lambda must be positive and finite");
    if (!std::isfinite(inbound_rate_C) || inbound_rate_C < 0.0)
      throw std::domain_error("inbound rate C must be non-negative and finite");
  }

  /// kappa = f = 1 with the given inbound ratio.
  static SystemParams normalized(double r) { return SystemParams{1.0, 1.0, 1.0, r}; }
};

/// Number of sides of a service polygon; either finite (>= 3) or the n -> infinity limit.
class Sides {
 public:
  static Sides finite(int n) {
    if (n < 3) throw std::domain_error("polygon needs at least 3 sides, got " + std::to_string(n));
    return Sides(Kind::finite, n);
  }
  static Sides infinite() { return Sides(Kind::infinite, 0); }

  bool is_infinite() const { return kind_ == Kind::infinite; }
  int count() const {
    if (is_infinite()) throw std::logic_error("infinite side count has no integer value");
    return n_;
  }

  friend bool operator==(const Sides&, const Sides&) = default;

 private:
  enum class Kind { finite, infinite };
  Sides(Kind k, int n) : kind_(k), n_(n) {}
  Kind kind_;
  int n_;
};

/// Cyclic service polygon: two alpha-sides crossed by the inbound tour and
/// n-2 alpha_bar-sides, all vertices on a circle of radius circumradius.
/// alpha and alpha_bar are half basic angles.
struct ShapeConfig {
  Sides sides = Sides::finite(6);
  double alpha = kPi / 6.0;
  double alpha_bar = kPi / 6.0;
  double circumradius = 1.0;

  void validate() const {
    if (!(circumradius > 0.0)) throw std::domain_error("circumradius must be positive");
    if (sides.is_infinite()) {
      if (alpha_bar != 0.0 || alpha < 0.0 || alpha >= kHalfPi)
        throw std::domain_error("limit shape needs alpha_bar = 0 and 0 <= alpha < pi/2");
      return;
    }
    const double n = sides.count();
    if (std::abs((n - 2.0) * alpha_bar + 2.0 * alpha - kPi) > 1e-12)
      throw std::domain_error("basic angles violate (n-2)*alpha_bar + 2*alpha = pi");
    if (alpha < kPi / n - 1e-12 || alpha >= kHalfPi || alpha + 1e-12 < alpha_bar)
      throw std::domain_error("alpha must satisfy pi/n <= alpha < pi/2 and alpha >= alpha_bar");
  }
};

/// Per area-time cost components.
struct CostBreakdown {
  double facility = 0.0;
  double outbound = 0.0;
  double inbound = 0.0;
  double inventory = 0.0;
  double total = 0.0;

  static CostBreakdown of(double facility, double outbound, double inbound, double inventory = 0.0) {
    return CostBreakdown{facility, outbound, inbound, inventory, facility + outbound + inbound + inventory};
  }
};

struct DensityResult {
  double area_per_facility = 0.0;
  double g_value = 0.0;
  CostBreakdown cost;
};

/// Inventory coefficients: order cost b*f*kappa^(1/3)/lambda, holding cost h*f*kappa^(1/3).
struct InventoryParams {
  double order_cost_b = 0.0;
  double holding_cost_h = 0.0;

  double bh() const { return order_cost_b * holding_cost_h; }
  void validate() const {
    if (!(order_cost_b >= 0.0) || !(holding_cost_h >= 0.0) || !std::isfinite(order_cost_b) ||
        !std::isfinite(holding_cost_h))
      throw std::domain_error("inventory coefficients b, h must be non-negative");
  }
};

class RootNotBracketed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Special functions

/// L(x) = log tan(x/2 + pi/4), the antiderivative of sec on [0, pi/2).
inline double secant_integral(double x) {
  if (!(x >= 0.0 && x < kHalfPi)) throw std::domain_error("secant_integral needs 0 <= x < pi/2");
  return std::log(std::tan(0.5 * x + 0.25 * kPi));
}

namespace detail {

// Signed version of L for |x| < pi/2 (L is odd).
inline double signed_secant_integral(double x) {
  return x >= 0.0 ? secant_integral(x) : -secant_integral(-x);
}

inline double sec_cubed_antiderivative(double t) {
  return 0.5 * (std::tan(t) / std::cos(t) + signed_secant_integral(t));
}

// p(x) = cos^2 x * L(x) / sin x, with p(0+) = 1.
inline double p_ratio(double x) {
  if (x < 1e-8) return 1.0 - 2.0 * x * x / 3.0;
  const double c = std::cos(x);
  return c * c * secant_integral(x) / std::sin(x);
}

}  // namespace detail

/// Integral of sec^3 over [-x, x]: tan x / cos x + L(x).
inline double sec_cubed_symmetric(double x) {
  if (!(x >= 0.0 && x < kHalfPi)) throw std::domain_error("sec_cubed_symmetric needs 0 <= x < pi/2");
  return std::tan(x) / std::cos(x) + secant_integral(x);
}

/// Integral of sec^3 over [lo, hi] with -pi/2 < lo <= hi < pi/2.
inline double sec_cubed_integral(double lo, double hi) {
  if (!(lo > -kHalfPi && hi < kHalfPi && lo <= hi)) throw std::domain_error("sec_cubed_integral bounds");
  return detail::sec_cubed_antiderivative(hi) - detail::sec_cubed_antiderivative(lo);
}

/// Outbound cost of a basic triangle with basic angle theta and area `area`,
/// whose altitude from the facility splits theta into alpha and theta - alpha.
inline double triangle_cost(double alpha, double theta, double area, double kappa, double f) {
  if (!(alpha > 0.0 && alpha < theta && theta <= kPi)) throw std::domain_error("triangle_cost needs 0 < alpha < theta <= pi");
  if (!(area > 0.0)) throw std::domain_error("triangle_cost needs positive area");
  if (alpha >= kHalfPi || theta - alpha >= kHalfPi)
    throw std::domain_error("triangle_cost: altitude foot outside the edge (sec^3 integral diverges)");
  const double shape = std::cos(theta) + std::cos(theta - 2.0 * alpha);
  return kappa * f / 3.0 * std::pow(std::sin(theta), -1.5) * std::pow(area, 1.5) * std::pow(shape, 1.5) *
         sec_cubed_integral(-(theta - alpha), alpha);
}

// ---------------------------------------------------------------------------
// Regular polygons (no inbound cost)

/// Shape coefficient of the regular n-gon; n may be any real >= 3.
inline double g_regular(double n) {
  if (!(n >= 3.0)) throw std::domain_error("g_regular needs n >= 3");
  const double x = kPi / n;
  return 3.0 * std::sqrt(n) * std::pow(std::tan(x), 1.5) / (secant_integral(x) + std::tan(x) / std::cos(x));
}

// ---------------------------------------------------------------------------
// Cyclic polygons with inbound cost (Euclidean)

inline double alpha_bar_of(double n, double alpha) { return (kPi - 2.0 * alpha) / (n - 2.0); }

namespace detail {

inline void check_cyclic_domain(double n, double r, double alpha) {
  if (!(n >= 3.0)) throw std::domain_error("cyclic polygon needs n >= 3");
  if (!(r >= 0.0)) throw std::domain_error("inbound ratio r must be non-negative");
  if (!(alpha >= kPi / n - 1e-14 && alpha < kHalfPi)) throw std::domain_error("alpha outside [pi/n, pi/2)");
}

}  // namespace detail

/// First-order condition of the cyclic-polygon cost in alpha (unique root on [pi/n, pi/2)).
inline double h_function(double n, double r, double alpha) {
  detail::check_cyclic_domain(n, r, alpha);
  const double ab = alpha_bar_of(n, alpha);
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  const double sb = std::sin(ab), cb = std::cos(ab);
  return sa * cb * cb * secant_integral(ab) - ca * ca * sb * secant_integral(alpha) - r * std::sin(2.0 * alpha) * sb -
         r * (n - 2.0) * cb * sb * sb;
}

/// h_function divided by sin(alpha) sin(alpha_bar); strictly increasing in alpha.
inline double h_normalized(double n, double r, double alpha) {
  detail::check_cyclic_domain(n, r, alpha);
  const double ab = alpha_bar_of(n, alpha);
  // (n-2) sin(ab) cos(ab) / sin(alpha), written to stay finite for huge n.
  const double fan = (kPi - 2.0 * alpha) * std::cos(ab) * (ab > 0.0 ? std::sin(ab) / ab : 1.0) / std::sin(alpha);
  return detail::p_ratio(ab) - detail::p_ratio(alpha) - 2.0 * r * std::cos(alpha) - r * fan;
}

/// Optimal half basic angle of the tour-crossed sides of an n-sided cyclic polygon.
inline double solve_alpha_star(double n, double r, double tol = 1e-13) {
  if (!(n >= 3.0)) throw std::domain_error("solve_alpha_star needs n >= 3");
  if (!(r >= 0.0)) throw std::domain_error("solve_alpha_star needs r >= 0");
  if (!(tol > 0.0)) throw std::domain_error("solve_alpha_star needs tol > 0");
  const double floor = kPi / n;
  if (r == 0.0 || h_normalized(n, r, floor) >= 0.0) return floor;
  double lo = floor + 1e-12;
  double hi = kHalfPi - 1e-9;
  double f_lo = h_normalized(n, r, lo);
  if (f_lo >= 0.0) return lo;
  if (h_normalized(n, r, hi) <= 0.0)
    throw RootNotBracketed("solve_alpha_star: normalized H does not change sign on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = h_normalized(n, r, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Shape coefficient of the cyclic polygon at any feasible alpha, straight
/// from the basic-triangle integrals: 1 / (mean distance + inbound share) at unit area.
inline double g_cyclic_general(double n, double r, double alpha) {
  detail::check_cyclic_domain(n, r, alpha);
  const double ab = alpha_bar_of(n, alpha);
  const double ca = std::cos(alpha), cb = std::cos(ab);
  const double R = 1.0 / std::sqrt((n - 2.0) * std::sin(ab) * cb + std::sin(2.0 * alpha));
  const double outbound =
      R * R * R / 3.0 * (2.0 * ca * ca * ca * sec_cubed_symmetric(alpha) + (n - 2.0) * cb * cb * cb * sec_cubed_symmetric(ab));
  return 1.0 / (outbound + 2.0 * r * R * ca);
}

/// Closed-form shape coefficient, simplified with H = 0; equals
/// g_cyclic_general only at the optimal alpha.
inline double g_cyclic_at(double n, double r, double alpha) {
  detail::check_cyclic_domain(n, r, alpha);
  const double ab = alpha_bar_of(n, alpha);
  const double sb = std::sin(ab), cb = std::cos(ab);
  const double area_term = std::sin(2.0 * alpha) + (n - 2.0) * cb * sb;
  return 3.0 * sb * std::sqrt(area_term) / (sb + cb * cb * secant_integral(ab) + 4.0 * r * sb * std::cos(alpha));
}

struct CyclicOptimum {
  double alpha = 0.0;
  double alpha_bar = 0.0;
  double g = 0.0;
};

inline CyclicOptimum cyclic_optimum(double n, double r) {
  const double a = solve_alpha_star(n, r);
  return CyclicOptimum{a, alpha_bar_of(n, a), g_cyclic_at(n, r, a)};
}

inline double g_cyclic(double n, double r) { return cyclic_optimum(n, r).g; }

/// Circumradius of a cyclic polygon with the given angles and area.
inline double cyclic_circumradius(double n, double alpha, double alpha_bar, double area) {
  return std::sqrt(area / ((n - 2.0) * std::sin(alpha_bar) * std::cos(alpha_bar) + std::sin(2.0 * alpha)));
}

// ---------------------------------------------------------------------------
// n -> infinity limit (lower bound)

/// Closed form of lim (n-2) H(n, r, alpha) as n -> infinity.
inline double limit_residual(double r, double alpha) {
  if (!(alpha >= 0.0 && alpha < kHalfPi)) throw std::domain_error("limit_residual needs 0 <= alpha < pi/2");
  const double ca = std::cos(alpha);
  const double open = kPi - 2.0 * alpha;
  return open * (std::sin(alpha) - ca * ca * secant_integral(alpha) - r * std::sin(2.0 * alpha) - r * open);
}

inline double alpha_star_limit(double r, double tol = 1e-14) {
  if (!(r >= 0.0)) throw std::domain_error("alpha_star_limit needs r >= 0");
  if (r == 0.0) return 0.0;
  // Bisect on the bracketed factor; (pi - 2 alpha) > 0 does not change the sign.
  auto inner = [r](double a) {
    const double ca = std::cos(a);
    return std::sin(a) - ca * ca * secant_integral(a) - r * std::sin(2.0 * a) - r * (kPi - 2.0 * a);
  };
  double lo = 0.0, hi = kHalfPi - 1e-12;
  if (inner(hi) <= 0.0) throw RootNotBracketed("alpha_star_limit: no sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (inner(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Closed form simplified with the first-order condition; exact at alpha_star_limit(r).
inline double g_limit_at(double r, double alpha) {
  return 3.0 * std::sqrt(std::sin(2.0 * alpha) + kPi - 2.0 * alpha) / (2.0 + 4.0 * r * std::cos(alpha));
}

inline double g_limit(double r) { return g_limit_at(r, alpha_star_limit(r)); }

/// Radius of the limit (stadium-like) region of area `area` with half angle alpha.
inline double limit_radius(double alpha, double area) {
  return std::sqrt(area / (std::sin(2.0 * alpha) + kPi - 2.0 * alpha));
}

/// Dispatch over finite and infinite side counts.
inline double g_coefficient(Sides sides, double r) {
  return sides.is_infinite() ? g_limit(r) : g_cyclic(sides.count(), r);
}

inline double alpha_star(Sides sides, double r) {
  return sides.is_infinite() ? alpha_star_limit(r) : solve_alpha_star(sides.count(), r);
}

// ---------------------------------------------------------------------------
// Rectilinear (L1) metric

inline double alpha_star_l1(double r) {
  if (!(r >= 0.0)) throw std::domain_error("alpha_star_l1 needs r >= 0");
  return std::atan(2.0 * r + std::sqrt(2.0 * r + 4.0 * r * r));
}

/// Closed form simplified with the first-order condition; exact at alpha_star_l1(r).
inline double g_bar_at(double alpha) {
  const double s = std::sin(alpha), c = std::cos(alpha);
  return 3.0 * std::sqrt(2.0 * c) * std::pow(2.0 * s + c, 1.5) /
         (3.0 * std::sin(2.0 * alpha) - 2.0 * std::cos(2.0 * alpha) + 4.0);
}

inline double g_bar(double r) { return g_bar_at(alpha_star_l1(r)); }

/// Corner radius R of the elongated L1 hexagon: 2 R^2 (cos^2 alpha + sin 2 alpha) = area.
inline double l1_corner_radius(double alpha, double area) {
  const double c = std::cos(alpha);
  return std::sqrt(area / (2.0 * (c * c + std::sin(2.0 * alpha))));
}

// ---------------------------------------------------------------------------
// Optimal density

/// Optimal area per facility and cost for shape coefficient g.
/// inbound_coef: inbound per-area cost is kappa*f*inbound_coef*sqrt(a); the
/// rest of the transport term is reported as outbound.
inline DensityResult z_from_g(const SystemParams& params, double g, double inbound_coef = 0.0) {
  params.validate();
  if (!(g > 0.0) || !std::isfinite(g)) throw std::domain_error("z_from_g needs g > 0");
  const double kappa = params.kappa();
  const double f = params.facility_cost_f;
  const double a = std::pow(kappa / 2.0, -2.0 / 3.0) * std::pow(g, 2.0 / 3.0);
  const double facility = f / a;
  const double transport = kappa * f * std::sqrt(a) / g;
  const double inbound = kappa * f * inbound_coef * std::sqrt(a);
  return DensityResult{a, g, CostBreakdown::of(facility, transport - inbound, inbound)};
}

/// Positive root u of (kappa/(2g)) u^3 - (sqrt(2bh)/2) kappa^(1/3) u - 1 = 0,
/// by Newton from above with a bisection safeguard.
inline double inventory_cubic_root(double kappa, double g, double bh) {
  const double a3 = kappa / (2.0 * g);
  const double a1 = 0.5 * std::sqrt(2.0 * bh) * std::cbrt(kappa);
  auto cubic = [&](double u) { return (a3 * u * u - a1) * u - 1.0; };
  double lo = 0.0;
  double hi = std::max(std::sqrt(2.0 * a1 / a3), std::cbrt(2.0 / a3));
  while (cubic(hi) < 0.0) hi *= 2.0;
  double u = hi;
  for (int it = 0; it < 200; ++it) {
    const double fu = cubic(u);
    if (fu == 0.0) return u;
    (fu < 0.0 ? lo : hi) = u;
    const double slope = 3.0 * a3 * u * u - a1;
    double next = slope > 0.0 ? u - fu / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-16 * u) return next;
    u = next;
  }
  return u;
}

/// Trigonometric closed form of the inventory-optimal area per facility.
/// Empty when the arccos argument (2bh/9)^(-3/4) g^(-1/2) exceeds 1.
inline std::optional<double> inventory_closed_form_area(double kappa, double g, double bh) {
  if (!(bh > 0.0)) return std::nullopt;
  const double arg = std::pow(2.0 * bh / 9.0, -0.75) / std::sqrt(g);
  if (arg > 1.0) return std::nullopt;
  const double c = std::cos(std::acos(arg) / 3.0);
  return 4.0 * std::sqrt(2.0) / 3.0 * std::pow(kappa, -2.0 / 3.0) * g * std::sqrt(bh) * c * c;
}

/// Optimal density when each facility also carries EOQ inventory cost
/// f * sqrt(2 bh A_i) * kappa^(1/3).
inline DensityResult inventory_area_density(const SystemParams& params, const InventoryParams& inv, double g,
                                            double inbound_coef = 0.0) {
  params.validate();
  inv.validate();
  if (!(g > 0.0) || !std::isfinite(g)) throw std::domain_error("inventory_area_density needs g > 0");
  const double bh = inv.bh();
  if (bh == 0.0) return z_from_g(params, g, inbound_coef);
  const double kappa = params.kappa();
  const double f = params.facility_cost_f;
  const double u = inventory_cubic_root(kappa, g, bh);
  const double a = u * u;
  const double transport = kappa * f * u / g;
  const double inbound = kappa * f * inbound_coef * u;
  const double inventory = f * std::sqrt(2.0 * bh * a) * std::cbrt(kappa) / a;
  return DensityResult{a, g, CostBreakdown::of(f / a, transport - inbound, inbound, inventory)};
}

/// Second-order condition under which a facility-specific (bh)_i(A) keeps the
/// inventory-augmented objective convex in A.
inline bool inventory_convexity_condition(double bh, double d_bh, double d2_bh, double area) {
  const double lhs = bh - area * d_bh;
  return 2.0 * bh * area * area * d2_bh - lhs * lhs >= 0.0;
}

}  // namespace transship
