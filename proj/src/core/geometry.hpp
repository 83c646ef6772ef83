#pragma once

#include <cmath>
#include <vector>

namespace beamsense::core {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
};

// Axis-aligned rectangle, [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(const Vec2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains_strict(const Vec2& p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Axis-aligned box, lo <= hi componentwise.
struct Box3 {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
};

// Convex polygon with CCW winding.
using Polygon = std::vector<Vec2>;

inline bool point_in_convex_polygon(const Polygon& poly, const Vec2& p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    if ((b - a).cross(p - a) < 0.0) return false;
  }
  return true;
}

inline Polygon rotate_translate(const Polygon& poly, double angle_deg, const Vec2& t) {
  const double a = angle_deg * M_PI / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  Polygon out;
  out.reserve(poly.size());
  for (const Vec2& p : poly) out.push_back({c * p.x - s * p.y + t.x, s * p.x + c * p.y + t.y});
  return out;
}

// Axis-aligned rectangle as a CCW polygon.
inline Polygon rect_polygon(double half_x, double half_y) {
  return {{-half_x, -half_y}, {half_x, -half_y}, {half_x, half_y}, {-half_x, half_y}};
}

inline bool polygons_overlap(const Polygon& a, const Polygon& b) {
  // Separating axis test for convex polygons.
  const auto separated = [](const Polygon& p, const Polygon& q) {
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 edge = p[(i + 1) % n] - p[i];
      const Vec2 axis{-edge.y, edge.x};
      double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
      for (const Vec2& v : p) {
        const double d = axis.dot(v);
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      for (const Vec2& v : q) {
        const double d = axis.dot(v);
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated(a, b) && !separated(b, a);
}

}  // namespace beamsense::core
