#pragma once

// Planar convex-polygon utilities used by the tessellation builder and the
// Voronoi angle measurement.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "transship/analytic.hpp"

namespace transship::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

using Polygon = std::vector<Point>;

inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Signed shoelace area; positive for counterclockwise vertex order.
inline double signed_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

inline double area(const Polygon& poly) { return std::abs(signed_area(poly)); }

/// True for a counterclockwise convex polygon (collinear vertices tolerated).
inline bool is_convex_ccw(const Polygon& poly, double tol = 1e-12) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  double scale = 0.0;
  for (const auto& p : poly) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  scale = std::max(scale, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i], b = poly[(i + 1) % n], c = poly[(i + 2) % n];
    if (cross(b - a, c - b) < -tol * scale * scale) return false;
  }
  return signed_area(poly) > 0.0;
}

/// Point-in-convex-polygon (CCW). Points within `tol` of an edge count as inside.
inline bool contains(const Polygon& poly, Point p, double tol = 1e-12) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i], b = poly[(i + 1) % n];
    const Point e = b - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, p - a) / len < -tol) return false;
  }
  return true;
}

/// Drop consecutive vertices closer than `eps` (degenerate edges).
inline Polygon dedupe(const Polygon& poly, double eps) {
  Polygon out;
  for (const auto& p : poly) {
    if (out.empty() || norm(p - out.back()) > eps) out.push_back(p);
  }
  while (out.size() > 1 && norm(out.front() - out.back()) <= eps) out.pop_back();
  return out;
}

/// Axis-aligned bounding box.
struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Point p, double tol = 0.0) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool empty() const { return !(x1 > x0 && y1 > y0); }
};

inline Box bounding_box(const Polygon& poly) {
  Box b{poly.front().x, poly.front().y, poly.front().x, poly.front().y};
  for (const auto& p : poly) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

/// Half of the angle subtended at `center` by the edge (a, b): a half basic angle.
inline double half_basic_angle(Point center, Point a, Point b) {
  const Point u = a - center, v = b - center;
  return 0.5 * std::atan2(std::abs(cross(u, v)), dot(u, v));
}

/// Half basic angles of every edge i -> i+1 of `poly` as seen from `center`.
inline std::vector<double> half_basic_angles(const Polygon& poly, Point center) {
  std::vector<double> out;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) out.push_back(half_basic_angle(center, poly[i], poly[(i + 1) % n]));
  return out;
}

/// Index of the edge of convex `poly` hit by the ray from interior point `from`
/// in direction `dir`; -1 when none.
inline int edge_hit_by_ray(const Polygon& poly, Point from, Point dir) {
  int best = -1;
  double best_t = INFINITY;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point a = poly[i], e = poly[(i + 1) % n] - a;
    const double den = cross(dir, e);
    if (std::abs(den) < 1e-15) continue;
    const Point w = a - from;
    const double t = cross(w, e) / den;
    const double s = cross(w, dir) / den;
    if (t > 0.0 && s >= -1e-9 && s <= 1.0 + 1e-9 && t < best_t) {
      best_t = t;
      best = static_cast<int>(i);
    }
  }
  return best;
}

/// Polygon edge tagged with the id of whatever produced it (neighbor facility or -1).
struct TaggedPolygon {
  Polygon vertices;
  std::vector<int> edge_tags;  // edge i runs vertices[i] -> vertices[i+1]
};

/// Clip a convex polygon to the half-plane { p : dot(normal, p) <= offset };
/// the new edge along the boundary gets `tag`.
inline TaggedPolygon clip(const TaggedPolygon& poly, Point normal, double offset, int tag) {
  TaggedPolygon out;
  const std::size_t n = poly.vertices.size();
  if (n == 0) return out;
  auto side = [&](Point p) { return dot(normal, p) - offset; };
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly.vertices[i], b = poly.vertices[(i + 1) % n];
    const double sa = side(a), sb = side(b);
    const int etag = poly.edge_tags[i];
    if (sa <= 0.0) {
      out.vertices.push_back(a);
      if (sb <= 0.0) {
        out.edge_tags.push_back(etag);
      } else {
        const double t = sa / (sa - sb);
        out.edge_tags.push_back(etag);
        out.vertices.push_back(a + t * (b - a));
        out.edge_tags.push_back(tag);
      }
    } else if (sb <= 0.0) {
      const double t = sa / (sa - sb);
      out.vertices.push_back(a + t * (b - a));
      out.edge_tags.push_back(etag);
    }
  }
  // Remove zero-length edges created by vertices lying exactly on the line.
  TaggedPolygon clean;
  for (std::size_t i = 0, m = out.vertices.size(); i < m; ++i) {
    if (norm(out.vertices[(i + 1) % m] - out.vertices[i]) > 1e-12) {
      clean.vertices.push_back(out.vertices[i]);
      clean.edge_tags.push_back(out.edge_tags[i]);
    }
  }
  return clean;
}

/// Euclidean Voronoi cell of sites[i] clipped to `box`; edge tags are neighbor
/// site indices, -1 for box edges.
inline TaggedPolygon voronoi_cell(const std::vector<Point>& sites, std::size_t i, const Box& box) {
  TaggedPolygon cell;
  cell.vertices = {{box.x0, box.y0}, {box.x1, box.y0}, {box.x1, box.y1}, {box.x0, box.y1}};
  cell.edge_tags = {-1, -1, -1, -1};
  const Point pi = sites[i];
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j == i) continue;
    const Point n = sites[j] - pi;
    const Point mid = 0.5 * (sites[j] + pi);
    cell = clip(cell, n, dot(n, mid), static_cast<int>(j));
    if (cell.vertices.empty()) break;
  }
  return cell;
}

}  // namespace transship::geom
