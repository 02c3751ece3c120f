#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "enclosure/errors.hpp"
#include "enclosure/geometry.hpp"

namespace enclosure {

// Prescribed Neumann current on the outer boundary.
//   linear: g = nu . direction (piecewise constant on a polygonal boundary)
//   mode:   g = cos(n theta) about the domain centroid, made zero-mean
struct CurrentSpec {
  enum class Type { linear, mode };
  Type type = Type::linear;
  Point2 direction{1.0, 0.0};
  int n = 1;

  static CurrentSpec linear(Point2 d) { return {Type::linear, d, 1}; }
  static CurrentSpec mode(int n) { return {Type::mode, {1.0, 0.0}, n}; }
};

struct Scene {
  Polygon omega;
  Polygon inclusion;
  double k = 2.0;
  CurrentSpec current;
};

struct SceneCheck {
  double inclusion_diameter = 0.0;
  double boundary_distance = 0.0;  // dist(D, boundary of Omega)
  bool restriction_holds = false;  // diam D < dist(D, boundary of Omega)
};

// The minimum distance from a convex inclusion to the boundary of a convex
// domain is attained at an inclusion vertex.
inline SceneCheck check_scene(const Scene& s) {
  if (!(s.k > 0.0) || !std::isfinite(s.k)) fail(ErrorKind::config, "conductivity contrast k must be positive");
  if (!s.omega.is_convex()) fail(ErrorKind::structural, "domain polygon must be convex");
  if (!s.inclusion.is_convex()) fail(ErrorKind::structural, "inclusion polygon must be convex");
  if (s.current.type == CurrentSpec::Type::mode && s.current.n < 1)
    fail(ErrorKind::config, "current mode index must be >= 1");
  if (s.current.type == CurrentSpec::Type::linear && norm(s.current.direction) == 0.0)
    fail(ErrorKind::config, "linear current needs a nonzero direction");
  SceneCheck c;
  c.inclusion_diameter = s.inclusion.diameter();
  c.boundary_distance = std::numeric_limits<double>::infinity();
  for (const auto& p : s.inclusion.vertices()) {
    if (!s.omega.contains(p)) fail(ErrorKind::geometry, "inclusion is not inside the domain");
    c.boundary_distance = std::min(c.boundary_distance, s.omega.boundary_distance(p));
  }
  const double margin = 1e-9 * s.omega.diameter();
  if (c.boundary_distance <= margin) fail(ErrorKind::geometry, "inclusion touches the domain boundary");
  c.restriction_holds = c.inclusion_diameter < c.boundary_distance;
  return c;
}

// Regular 64-gon of circumradius 3, unit square inclusion centred at the
// origin, k = 2, current nu . (1, 0).
inline Scene default_scene() {
  return Scene{regular_polygon(64, 3.0), axis_square(0.5), 2.0, CurrentSpec::linear({1.0, 0.0})};
}

}  // namespace enclosure
