#pragma once

// Minimal SVG 1.1 writer: polygons, polylines, circles and text in a fixed
// viewport. Coordinates are given in world units and mapped with y up.

#include <algorithm>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "transship/format.hpp"

namespace transship::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

class Document {
 public:
  /// World box [x0, x1] x [y0, y1] mapped onto a width x height pixel canvas with a margin.
  Document(double x0, double y0, double x1, double y1, double width = 800.0, double margin = 40.0)
      : x0_(x0), y0_(y0), margin_(margin) {
    const double w = std::max(x1 - x0, 1e-12);
    const double h = std::max(y1 - y0, 1e-12);
    scale_ = (width - 2.0 * margin) / w;
    width_ = width;
    height_ = h * scale_ + 2.0 * margin;
    world_h_ = h;
  }

  /// Independent x/y scaling (charts).
  static Document chart(double x0, double y0, double x1, double y1, double width, double height, double margin) {
    Document d(x0, y0, x1, y1, width, margin);
    d.height_ = height;
    d.scale_y_ = (height - 2.0 * margin) / std::max(y1 - y0, 1e-12);
    d.world_h_ = y1 - y0;
    return d;
  }

  void comment(const std::string& text) {
    std::string safe = text;
    for (std::size_t p; (p = safe.find("--")) != std::string::npos;) safe.replace(p, 2, "- ");
    body_ << "<!-- " << safe << " -->\n";
  }

  void polygon(const std::vector<Point>& pts, const std::string& style) {
    body_ << "<polygon points=\"" << point_list(pts) << "\" style=\"" << style << "\"/>\n";
  }

  void polyline(const std::vector<Point>& pts, const std::string& style, const std::string& id = {}) {
    body_ << "<polyline";
    if (!id.empty()) body_ << " id=\"" << id << "\"";
    body_ << " points=\"" << point_list(pts) << "\" style=\"" << style << "\"/>\n";
  }

  void circle(Point c, double radius_px, const std::string& style) {
    body_ << "<circle cx=\"" << format_number(px(c.x), 8) << "\" cy=\"" << format_number(py(c.y), 8) << "\" r=\""
          << format_number(radius_px, 6) << "\" style=\"" << style << "\"/>\n";
  }

  void line_px(double x0, double y0, double x1, double y1, const std::string& style) {
    body_ << "<line x1=\"" << format_number(x0, 8) << "\" y1=\"" << format_number(y0, 8) << "\" x2=\""
          << format_number(x1, 8) << "\" y2=\"" << format_number(y1, 8) << "\" style=\"" << style << "\"/>\n";
  }

  void text_px(double x, double y, const std::string& text, const std::string& style = "font-size:12px") {
    body_ << "<text x=\"" << format_number(x, 8) << "\" y=\"" << format_number(y, 8) << "\" style=\"" << style
          << "\">" << text << "</text>\n";
  }

  double px(double x) const { return margin_ + (x - x0_) * scale_; }
  double py(double y) const { return height_ - margin_ - (y - y0_) * (scale_y_ > 0.0 ? scale_y_ : scale_); }
  double width() const { return width_; }
  double height() const { return height_; }

  void write(std::ostream& os) const {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << format_number(width_, 8)
       << "\" height=\"" << format_number(height_, 8) << "\" viewBox=\"0 0 " << format_number(width_, 8) << ' '
       << format_number(height_, 8) << "\">\n"
       << body_.str() << "</svg>\n";
  }

 private:
  std::string point_list(const std::vector<Point>& pts) const {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out += ' ';
      out += format_number(px(pts[i].x), 8);
      out += ',';
      out += format_number(py(pts[i].y), 8);
    }
    return out;
  }

  double x0_, y0_, margin_;
  double scale_ = 1.0;
  double scale_y_ = 0.0;
  double width_ = 0.0, height_ = 0.0, world_h_ = 0.0;
  std::ostringstream body_;
};

}  // namespace transship::svg
