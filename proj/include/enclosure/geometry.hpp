#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "enclosure/errors.hpp"

namespace enclosure {

inline constexpr double pi = std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

// Twice the signed area of (a, b, c); positive when counter-clockwise.
constexpr double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

inline double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + s * ab);
}

// Unit direction omega = (cos phi, sin phi) paired with omega_perp, the
// clockwise rotation of omega, so that det(omega, omega_perp) = -1.
// The opposite orientation of the pair is not representable.
class Direction {
 public:
  Direction() : Direction(0.0) {}
  explicit Direction(double phi)
      : phi_(phi),
        omega_{std::cos(phi), std::sin(phi)},
        omega_perp_{std::sin(phi), -std::cos(phi)} {}

  double angle() const { return phi_; }
  Point2 omega() const { return omega_; }
  Point2 omega_perp() const { return omega_perp_; }

 private:
  double phi_;
  Point2 omega_;
  Point2 omega_perp_;
};

// Simple polygon with counter-clockwise vertex order.
class Polygon {
 public:
  Polygon() = default;

  explicit Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    validate();
  }

  std::span<const Point2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }
  const Point2& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

  double area() const {
    double twice = 0.0;
    for (std::size_t i = 0; i < size(); ++i) twice += cross(vertex(i), vertex(i + 1));
    return 0.5 * twice;
  }

  double perimeter() const {
    double len = 0.0;
    for (std::size_t i = 0; i < size(); ++i) len += distance(vertex(i), vertex(i + 1));
    return len;
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) d = std::max(d, distance(vertices_[i], vertices_[j]));
    return d;
  }

  Point2 centroid() const {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const Point2 p = vertex(i), q = vertex(i + 1);
      const double c = cross(p, q);
      a += c;
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
  }

  // Every turn is a left turn (strictly, since vertices are corners).
  bool is_convex() const {
    const double scale = diameter();
    for (std::size_t i = 0; i < size(); ++i) {
      if (orient(vertex(i), vertex(i + 1), vertex(i + 2)) <= 1e-14 * scale * scale) return false;
    }
    return true;
  }

  // Outward unit normal of edge i (from vertex i to vertex i+1): clockwise
  // rotation of the edge tangent.
  Point2 edge_normal(std::size_t i) const {
    const Point2 e = vertex(i + 1) - vertex(i);
    const double len = norm(e);
    return {e.y / len, -e.x / len};
  }

  // Closed polygon containment (boundary counts as inside).
  bool contains(Point2 p, double tol = 0.0) const {
    if (boundary_distance(p) <= tol) return true;
    bool inside = false;
    for (std::size_t i = 0, j = size() - 1; i < size(); j = i++) {
      const Point2 a = vertices_[i], b = vertices_[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xs = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < xs) inside = !inside;
      }
    }
    return inside;
  }

  double boundary_distance(Point2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) d = std::min(d, segment_distance(p, vertex(i), vertex(i + 1)));
    return d;
  }

  Polygon translated(Point2 s) const {
    std::vector<Point2> v(vertices_);
    for (auto& p : v) p = p + s;
    return Polygon(std::move(v));
  }

  Polygon scaled(double s, Point2 center = {}) const {
    std::vector<Point2> v(vertices_);
    for (auto& p : v) p = center + s * (p - center);
    return Polygon(std::move(v));
  }

 private:
  void validate() const {
    if (vertices_.size() < 3) fail(ErrorKind::structural, "polygon needs at least 3 vertices");
    for (const auto& p : vertices_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        fail(ErrorKind::structural, "polygon vertex is not finite");
    }
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) {
        if (vertices_[i] == vertices_[j]) fail(ErrorKind::structural, "polygon has a repeated vertex");
      }
    }
    if (area() <= 0.0) fail(ErrorKind::structural, "polygon must be counter-clockwise with positive area");
    // Non-adjacent edges must not touch.
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (segments_intersect(vertex(i), vertex(i + 1), vertex(j), vertex(j + 1)))
          fail(ErrorKind::structural, "polygon is not simple");
      }
    }
  }

  static bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double d1 = orient(c, d, a), d2 = orient(c, d, b);
    const double d3 = orient(a, b, c), d4 = orient(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
      return true;
    auto on_segment = [](Point2 p, Point2 q, Point2 r) {
      return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
             r.y <= std::max(p.y, q.y);
    };
    return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) ||
           (d3 == 0 && on_segment(a, b, c)) || (d4 == 0 && on_segment(a, b, d));
  }

  std::vector<Point2> vertices_;
};

inline Polygon regular_polygon(std::size_t n, double circumradius, Point2 center = {}, double rotation = 0.0) {
  std::vector<Point2> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rotation + 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
    v.push_back({center.x + circumradius * std::cos(a), center.y + circumradius * std::sin(a)});
  }
  return Polygon(std::move(v));
}

inline Polygon axis_square(double half_side, Point2 center = {}) {
  return Polygon({{center.x - half_side, center.y - half_side},
                  {center.x + half_side, center.y - half_side},
                  {center.x + half_side, center.y + half_side},
                  {center.x - half_side, center.y + half_side}});
}

// h_P(omega) = max over vertices of x . omega.
inline double support_function(const Polygon& poly, const Direction& d) {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& p : poly.vertices()) h = std::max(h, dot(p, d.omega()));
  return h;
}

inline constexpr double default_angle_tol = 1e-9;

// Gap between the best and second-best vertex, relative to the diameter.
// Zero on edge-normal directions.
inline double regularity_margin(const Polygon& poly, const Direction& d) {
  double best = -std::numeric_limits<double>::infinity(), second = best;
  for (const auto& p : poly.vertices()) {
    const double s = dot(p, d.omega());
    if (s > best) {
      second = best;
      best = s;
    } else if (s > second) {
      second = s;
    }
  }
  return (best - second) / poly.diameter();
}

inline bool is_regular(const Polygon& poly, const Direction& d, double angle_tol = default_angle_tol) {
  const double h = support_function(poly, d);
  const double tol = angle_tol * poly.diameter();
  std::size_t count = 0;
  for (const auto& p : poly.vertices()) {
    if (h - dot(p, d.omega()) <= tol) ++count;
  }
  return count == 1;
}

// Local frame at the contact vertex of a regular direction. Edge angles are
// measured in the (omega_perp, omega) basis: an edge leaving x0 has direction
// cos(a) omega_perp + sin(a) omega.
struct VertexFrame {
  std::size_t vertex_index = 0;
  Point2 x0;
  double theta = 0.0;  // outside angle, in (pi, 2 pi)
  double p = 0.0;      // -pi < q < p < 0
  double q = 0.0;
  Point2 a;       // direction of the p-edge
  Point2 a_perp;  // counter-clockwise rotation of a
};

inline VertexFrame vertex_frame(const Polygon& poly, const Direction& d, double angle_tol = default_angle_tol) {
  if (!is_regular(poly, d, angle_tol))
    fail(ErrorKind::regularity, "direction is not regular with respect to the polygon");
  std::size_t best = 0;
  for (std::size_t i = 1; i < poly.size(); ++i) {
    if (dot(poly[i], d.omega()) > dot(poly[best], d.omega())) best = i;
  }
  const Point2 x0 = poly[best];
  const Point2 w = d.omega(), wp = d.omega_perp();
  auto edge_angle = [&](Point2 to) {
    const Point2 e = to - x0;
    return std::atan2(dot(e, w), dot(e, wp));
  };
  const std::size_t n = poly.size();
  const double a1 = edge_angle(poly[(best + 1) % n]);
  const double a2 = edge_angle(poly[(best + n - 1) % n]);
  VertexFrame f;
  f.vertex_index = best;
  f.x0 = x0;
  f.p = std::max(a1, a2);
  f.q = std::min(a1, a2);
  f.theta = 2.0 * pi + f.q - f.p;
  f.a = std::cos(f.p) * wp + std::sin(f.p) * w;
  f.a_perp = -std::sin(f.p) * wp + std::cos(f.p) * w;
  return f;
}

struct SupportSample {
  Direction direction;
  double h = 0.0;
};

// Intersection of the half-planes {x . omega_i <= h_i}. Duplicate directions
// keep the smallest h; redundant constraints are pruned.
inline Polygon hull_from_support(std::span<const SupportSample> samples) {
  struct Line {
    double angle;
    Point2 n;
    double h;
  };
  std::vector<Line> lines;
  lines.reserve(samples.size());
  double scale = 1.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.h)) fail(ErrorKind::structural, "support value is not finite");
    double a = std::fmod(s.direction.angle(), 2.0 * pi);
    if (a < 0.0) a += 2.0 * pi;
    lines.push_back({a, {std::cos(a), std::sin(a)}, s.h});
    scale = std::max(scale, std::abs(s.h));
  }
  std::sort(lines.begin(), lines.end(), [](const Line& l, const Line& r) {
    return l.angle < r.angle || (l.angle == r.angle && l.h < r.h);
  });
  std::vector<Line> uniq;
  for (const auto& l : lines) {
    if (!uniq.empty() && std::abs(l.angle - uniq.back().angle) <= 1e-12) continue;
    uniq.push_back(l);
  }
  if (uniq.size() > 1 && std::abs(uniq.back().angle - 2.0 * pi - uniq.front().angle) <= 1e-12) {
    uniq.front().h = std::min(uniq.front().h, uniq.back().h);
    uniq.pop_back();
  }
  if (uniq.size() < 3) fail(ErrorKind::coverage, "need at least 3 distinct directions");
  double max_gap = 0.0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const double next = i + 1 < uniq.size() ? uniq[i + 1].angle : uniq[0].angle + 2.0 * pi;
    max_gap = std::max(max_gap, next - uniq[i].angle);
  }
  if (max_gap >= pi - 1e-12) fail(ErrorKind::coverage, "directions do not bound the intersection");

  const double eps = 1e-12 * scale;
  auto meet = [](const Line& l1, const Line& l2) -> std::optional<Point2> {
    const double det = cross(l1.n, l2.n);
    if (det <= 1e-14) return std::nullopt;
    return Point2{(l1.h * l2.n.y - l2.h * l1.n.y) / det, (l1.n.x * l2.h - l2.n.x * l1.h) / det};
  };
  auto outside = [&](const Line& l, const std::optional<Point2>& p) {
    return !p || dot(l.n, *p) - l.h > eps;
  };

  std::deque<Line> dq;
  for (const auto& l : uniq) {
    while (dq.size() >= 2 && outside(l, meet(dq[dq.size() - 2], dq.back()))) dq.pop_back();
    while (dq.size() >= 2 && outside(l, meet(dq[0], dq[1]))) dq.pop_front();
    dq.push_back(l);
  }
  while (dq.size() >= 3 && outside(dq.front(), meet(dq[dq.size() - 2], dq.back()))) dq.pop_back();
  while (dq.size() >= 3 && outside(dq.back(), meet(dq[0], dq[1]))) dq.pop_front();
  if (dq.size() < 3) fail(ErrorKind::inconsistency, "support constraints have empty intersection");

  std::vector<Point2> verts;
  for (std::size_t i = 0; i < dq.size(); ++i) {
    const auto p = meet(dq[i], dq[(i + 1) % dq.size()]);
    if (!p) fail(ErrorKind::inconsistency, "support constraints have empty intersection");
    if (verts.empty() || distance(*p, verts.back()) > 1e-12 * scale) verts.push_back(*p);
  }
  while (verts.size() > 1 && distance(verts.front(), verts.back()) <= 1e-12 * scale) verts.pop_back();
  for (const auto& p : verts) {
    for (const auto& l : uniq) {
      if (dot(l.n, p) - l.h > 1e-9 * scale)
        fail(ErrorKind::inconsistency, "support constraints have empty intersection");
    }
  }
  if (verts.size() < 3) fail(ErrorKind::inconsistency, "support constraints have empty intersection");
  return Polygon(std::move(verts));
}

// Distance from p to the closed region of a convex polygon.
inline double region_distance(Point2 p, const Polygon& poly) {
  if (poly.contains(p)) return 0.0;
  return poly.boundary_distance(p);
}

// Hausdorff distance between two convex regions; the extremes are attained
// at vertices.
inline double hausdorff_distance(const Polygon& a, const Polygon& b) {
  double d = 0.0;
  for (const auto& p : a.vertices()) d = std::max(d, region_distance(p, b));
  for (const auto& p : b.vertices()) d = std::max(d, region_distance(p, a));
  return d;
}

}  // namespace enclosure
