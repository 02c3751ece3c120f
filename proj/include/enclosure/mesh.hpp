#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "enclosure/errors.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/scene.hpp"

namespace enclosure {

enum class Region : std::uint8_t { outside, inside };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  Point2 normal;     // outward unit normal
  int side = 0;      // index of the domain polygon edge that carries it
};

struct Mesh {
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<Region> regions;                // one per triangle
  std::vector<BoundaryEdge> boundary;         // closed counter-clockwise loop
  std::vector<int> interface_loop;            // inclusion boundary nodes, counter-clockwise

  double triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
  }

  double triangle_diameter(std::size_t t) const {
    const auto& tri = triangles[t];
    return std::max({distance(nodes[tri[0]], nodes[tri[1]]), distance(nodes[tri[1]], nodes[tri[2]]),
                     distance(nodes[tri[2]], nodes[tri[0]])});
  }
};

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// Positive when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
inline double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const long double adx = a.x - d.x, ady = a.y - d.y;
  const long double bdx = b.x - d.x, bdy = b.y - d.y;
  const long double cdx = c.x - d.x, cdy = c.y - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
  const long double scale = std::max({ad, bd, cd});
  if (std::abs(det) <= 1e-13L * scale * scale) return 0.0;
  return static_cast<double>(det);
}

// Incremental constrained Delaunay triangulation of a convex region. The
// outer boundary is triangulated first; interior points are inserted with
// Lawson flips; constraint edges are never flipped.
class Triangulator {
 public:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[i] is across the edge opposite v[i]
  };

  explicit Triangulator(std::vector<Point2> boundary_loop) : pts_(std::move(boundary_loop)) {
    const int n = static_cast<int>(pts_.size());
    for (int i = 0; i < n; ++i) constrained_.insert(edge_key(i, (i + 1) % n));
    ear_clip(n);
    std::vector<std::pair<int, int>> stack;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      for (int i = 0; i < 3; ++i) stack.emplace_back(t, i);
    lawson(stack);
  }

  const std::vector<Point2>& points() const { return pts_; }
  const std::vector<Tri>& triangles() const { return tris_; }

  // Inserts p and returns its index.
  int insert(Point2 p) {
    const int id = static_cast<int>(pts_.size());
    pts_.push_back(p);
    auto [t, edge] = locate(p);
    if (edge < 0) {
      split_triangle(t, id);
    } else {
      split_edge(t, edge, id);
    }
    return id;
  }

  void constrain(int a, int b) { constrained_.insert(edge_key(a, b)); }

 private:
  void ear_clip(int n) {
    std::vector<int> poly(n);
    for (int i = 0; i < n; ++i) poly[i] = i;
    while (poly.size() > 3) {
      const int m = static_cast<int>(poly.size());
      int best = -1;
      double best_quality = -1.0;
      for (int i = 0; i < m; ++i) {
        const Point2 a = pts_[poly[(i + m - 1) % m]], b = pts_[poly[i]], c = pts_[poly[(i + 1) % m]];
        const double o = orient(a, b, c);
        const double l2 = std::max({dot(b - a, b - a), dot(c - b, c - b), dot(a - c, a - c)});
        if (o <= 1e-12 * l2) continue;
        const double quality = o / l2;
        if (quality > best_quality) {
          best_quality = quality;
          best = i;
        }
      }
      if (best < 0) fail(ErrorKind::geometry, "cannot triangulate the domain boundary");
      tris_.push_back({{poly[(best + m - 1) % m], poly[best], poly[(best + 1) % m]}, {-1, -1, -1}});
      poly.erase(poly.begin() + best);
    }
    tris_.push_back({{poly[0], poly[1], poly[2]}, {-1, -1, -1}});
    std::unordered_map<std::uint64_t, std::pair<int, int>> seen;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      for (int i = 0; i < 3; ++i) {
        const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
        const auto key = edge_key(a, b);
        if (auto it = seen.find(key); it != seen.end()) {
          tris_[t].nb[i] = it->second.first;
          tris_[it->second.first].nb[it->second.second] = t;
        } else {
          seen.emplace(key, std::make_pair(t, i));
        }
      }
    }
  }

  std::pair<int, int> locate(Point2 p) {
    int t = last_ >= 0 && last_ < static_cast<int>(tris_.size()) ? last_ : 0;
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const auto& tri = tris_[t];
      int move = -1;
      int on_edge = -1;
      const int start = static_cast<int>(step % 3);
      for (int k = 0; k < 3; ++k) {
        const int i = (start + k) % 3;
        const Point2 a = pts_[tri.v[(i + 1) % 3]], b = pts_[tri.v[(i + 2) % 3]];
        const double o = orient(a, b, p);
        const double tol = 1e-10 * dot(b - a, b - a);
        if (o < -tol) {
          move = i;
          break;
        }
        if (o <= tol) on_edge = i;
      }
      if (move < 0) {
        last_ = t;
        return {t, on_edge};
      }
      if (tri.nb[move] < 0) fail(ErrorKind::geometry, "mesh point lies outside the domain");
      t = tri.nb[move];
    }
    fail(ErrorKind::geometry, "point location failed");
  }

  void replace_neighbor(int t, int old_nb, int new_nb) {
    if (t < 0) return;
    for (int& n : tris_[t].nb)
      if (n == old_nb) {
        n = new_nb;
        return;
      }
  }

  void split_triangle(int t, int p) {
    const auto [a, b, c] = tris_[t].v;
    const auto [na, nb, nc] = tris_[t].nb;  // across bc, ca, ab
    const int t1 = static_cast<int>(tris_.size());
    const int t2 = t1 + 1;
    // t: (a, b, p), t1: (b, c, p), t2: (c, a, p)
    tris_[t] = {{a, b, p}, {t1, t2, nc}};
    tris_.push_back({{b, c, p}, {t2, t, na}});
    tris_.push_back({{c, a, p}, {t, t1, nb}});
    replace_neighbor(na, t, t1);
    replace_neighbor(nb, t, t2);
    std::vector<std::pair<int, int>> stack{{t, 2}, {t1, 2}, {t2, 2}};
    lawson(stack);
  }

  void split_edge(int t, int i, int p) {
    const int a = tris_[t].v[i], b = tris_[t].v[(i + 1) % 3], c = tris_[t].v[(i + 2) % 3];
    const int u = tris_[t].nb[i];
    if (u < 0) fail(ErrorKind::geometry, "cannot insert a point on the domain boundary");
    const int j = opposite_index(u, b, c);
    const int d = tris_[u].v[j];
    const int t_ab = tris_[t].nb[(i + 2) % 3];  // across (a, b)
    const int t_ca = tris_[t].nb[(i + 1) % 3];  // across (c, a)
    const int u_dc = tris_[u].nb[(j + 2) % 3];  // across (d, c)
    const int u_bd = tris_[u].nb[(j + 1) % 3];  // across (b, d)
    const bool was_constrained = constrained_.erase(edge_key(b, c)) > 0;
    const int t2 = static_cast<int>(tris_.size());
    const int u2 = t2 + 1;
    // t: (a, b, p), t2: (a, p, c), u: (d, c, p), u2: (d, p, b)
    tris_[t] = {{a, b, p}, {u2, t2, t_ab}};
    tris_.push_back({{a, p, c}, {u, t_ca, t}});
    tris_[u] = {{d, c, p}, {t2, u2, u_dc}};
    tris_.push_back({{d, p, b}, {t, u_bd, u}});
    replace_neighbor(t_ca, t, t2);
    replace_neighbor(u_bd, u, u2);
    if (was_constrained) {
      constrained_.insert(edge_key(b, p));
      constrained_.insert(edge_key(p, c));
    }
    std::vector<std::pair<int, int>> stack{{t, 2}, {t2, 1}, {u, 2}, {u2, 1}};
    lawson(stack);
  }

  int opposite_index(int u, int b, int c) const {
    for (int j = 0; j < 3; ++j)
      if (tris_[u].v[j] != b && tris_[u].v[j] != c) return j;
    fail(ErrorKind::geometry, "corrupt triangulation adjacency");
  }

  // Flips the edge opposite v[i] of t if it is not locally Delaunay. Returns
  // false when no flip happened.
  bool flip_if_illegal(int t, int i, std::vector<std::pair<int, int>>& stack) {
    const int u = tris_[t].nb[i];
    if (u < 0) return false;
    const int a = tris_[t].v[i], b = tris_[t].v[(i + 1) % 3], c = tris_[t].v[(i + 2) % 3];
    if (constrained_.count(edge_key(b, c))) return false;
    const int j = opposite_index(u, b, c);
    const int d = tris_[u].v[j];
    if (incircle(pts_[a], pts_[b], pts_[c], pts_[d]) <= 0.0) return false;
    if (orient(pts_[a], pts_[b], pts_[d]) <= 0.0 || orient(pts_[a], pts_[d], pts_[c]) <= 0.0) return false;
    const int t_ab = tris_[t].nb[(i + 2) % 3];
    const int t_ca = tris_[t].nb[(i + 1) % 3];
    const int u_dc = tris_[u].nb[(j + 2) % 3];
    const int u_bd = tris_[u].nb[(j + 1) % 3];
    // t: (a, b, d), u: (a, d, c)
    tris_[t] = {{a, b, d}, {u_bd, u, t_ab}};
    tris_[u] = {{a, d, c}, {u_dc, t_ca, t}};
    replace_neighbor(u_bd, u, t);
    replace_neighbor(t_ca, t, u);
    stack.emplace_back(t, 0);
    stack.emplace_back(t, 2);
    stack.emplace_back(u, 0);
    stack.emplace_back(u, 1);
    return true;
  }

  void lawson(std::vector<std::pair<int, int>>& stack) {
    std::size_t guard = 0;
    while (!stack.empty()) {
      auto [t, i] = stack.back();
      stack.pop_back();
      flip_if_illegal(t, i, stack);
      if (++guard > 50'000'000) fail(ErrorKind::geometry, "edge flipping did not terminate");
    }
  }

  std::vector<Point2> pts_;
  std::vector<Tri> tris_;
  std::unordered_set<std::uint64_t> constrained_;
  int last_ = 0;
};

// Edge breakpoints (arc-length positions in [0, len]) with spacing at most
// h, plus geometric grading with ratio 1/2 toward both ends.
inline std::vector<double> graded_breakpoints(double len, double h, double corner_h, int depth) {
  std::vector<double> s{0.0};
  double lo = 0.0, hi = len;
  if (depth > 0) {
    std::vector<double> near;
    for (int j = depth; j >= 1; --j) near.push_back(corner_h * std::ldexp(1.0, -j));
    for (double d : near) s.push_back(d);
    lo = near.back();
    hi = len - near.back();
  }
  const int m = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
  for (int i = 1; i < m; ++i) s.push_back(lo + (hi - lo) * i / m);
  if (depth > 0) {
    s.push_back(hi);
    for (int j = 2; j <= depth; ++j) s.push_back(len - corner_h * std::ldexp(1.0, -j));
  }
  s.push_back(len);
  return s;
}

}  // namespace detail

// Interface-fitted triangulation of the scene domain. Mesh size h_target in
// the bulk; toward each inclusion vertex the size halves `grading_depth`
// times. Every inclusion edge is a union of mesh edges.
inline Mesh build_mesh(const Scene& scene, double h_target, int grading_depth) {
  check_scene(scene);
  if (!(h_target > 0.0)) fail(ErrorKind::config, "mesh size must be positive");
  if (grading_depth < 0 || grading_depth > 20) fail(ErrorKind::config, "grading depth out of range");
  const Polygon& omega = scene.omega;
  const Polygon& incl = scene.inclusion;
  // Bulk spacing below h_target leaves room for the irregular band along
  // boundaries; remaining oversized triangles are split below.
  const double h = 0.85 * h_target;

  // Outer boundary loop.
  std::vector<Point2> outer;
  std::vector<int> outer_side;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const Point2 a = omega.vertex(i), b = omega.vertex(i + 1);
    const int m = std::max(1, static_cast<int>(std::ceil(distance(a, b) / h - 1e-9)));
    for (int j = 0; j < m; ++j) {
      outer.push_back(a + (static_cast<double>(j) / m) * (b - a));
      outer_side.push_back(static_cast<int>(i));
    }
  }
  detail::Triangulator tri(outer);

  double min_edge = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < incl.size(); ++i) min_edge = std::min(min_edge, distance(incl.vertex(i), incl.vertex(i + 1)));
  const double corner_h = std::min(h, 0.4 * min_edge);

  // Inclusion boundary (constraint chain).
  std::vector<int> loop;
  for (std::size_t i = 0; i < incl.size(); ++i) {
    const Point2 a = incl.vertex(i), b = incl.vertex(i + 1);
    const double len = distance(a, b);
    const auto s = detail::graded_breakpoints(len, h, corner_h, grading_depth);
    for (std::size_t j = 0; j + 1 < s.size(); ++j) loop.push_back(tri.insert(a + (s[j] / len) * (b - a)));
  }

  auto near_inclusion_boundary = [&](Point2 p, double r) { return incl.boundary_distance(p) < r; };

  // Rings of points around each inclusion vertex, matching the edge grading.
  if (grading_depth > 0) {
    for (std::size_t v = 0; v < incl.size(); ++v) {
      const Point2 c = incl.vertex(v);
      for (int j = 0; j <= grading_depth; ++j) {
        const double r = corner_h * std::ldexp(1.0, -j);
        const double offset = (j % 2) * pi / 12.0;
        for (int s = 0; s < 12; ++s) {
          const double ang = offset + 2.0 * pi * s / 12.0;
          const Point2 p{c.x + r * std::cos(ang), c.y + r * std::sin(ang)};
          if (near_inclusion_boundary(p, 0.35 * r)) continue;
          if (omega.boundary_distance(p) < 0.5 * h || !omega.contains(p)) continue;
          tri.insert(p);
        }
      }
    }
  }

  // Layers of scaled copies of the outer boundary nodes about the domain
  // centroid, alternately staggered, down to a little outside the inclusion.
  // The layered band keeps the symmetry of the boundary subdivision.
  const Point2 oc = omega.centroid();
  std::vector<Point2> onormal;
  std::vector<double> osupport;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    onormal.push_back(omega.edge_normal(i));
    osupport.push_back(dot(omega.vertex(i) - oc, onormal.back()));
  }
  auto gauge = [&](Point2 p) {
    double g = 0.0;
    for (std::size_t i = 0; i < onormal.size(); ++i) g = std::max(g, dot(p - oc, onormal[i]) / osupport[i]);
    return g;
  };
  const double inradius = *std::min_element(osupport.begin(), osupport.end());
  double reach = 0.0;
  for (const auto& v : incl.vertices()) reach = std::max(reach, gauge(v));
  const double s_stop = reach + 1.5 * h / inradius;
  double s_last = 1.0;
  double h_bnd = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) h_bnd = std::max(h_bnd, distance(outer[i], outer[(i + 1) % outer.size()]));
  for (int layer = 1;; ++layer) {
    const double s = s_last * (1.0 - 0.5 * std::sqrt(3.0) * h_bnd / inradius);
    if (s < s_stop) break;
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const Point2 b = (layer % 2) ? 0.5 * (outer[i] + outer[(i + 1) % outer.size()]) : outer[i];
      tri.insert(oc + s * (b - oc));
    }
    s_last = s;
  }
  const double lattice_gauge = s_last - 0.5 * s_last * h_bnd / inradius;

  // Triangular lattice fill of the core.
  double xmin = omega[0].x, xmax = xmin, ymin = omega[0].y, ymax = ymin;
  for (const auto& p : omega.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double dy = h * std::sqrt(3.0) / 2.0;
  const double ring_clear = 1.4 * corner_h;
  for (int row = 0; ymin + row * dy <= ymax; ++row) {
    const double y = ymin + row * dy;
    const double x0 = xmin + ((row % 2) ? 0.5 * h : 0.0);
    for (int col = 0; x0 + col * h <= xmax; ++col) {
      const Point2 p{x0 + col * h, y};
      if (gauge(p) > lattice_gauge) continue;
      if (near_inclusion_boundary(p, 0.5 * h)) continue;
      if (grading_depth > 0) {
        bool close = false;
        for (const auto& c : incl.vertices()) close = close || distance(p, c) < ring_clear;
        if (close) continue;
      }
      tri.insert(p);
    }
  }

  // Recover inclusion edges by splitting missing segments at midpoints.
  for (int pass = 0;; ++pass) {
    if (pass > 40) fail(ErrorKind::mesh, "could not recover the inclusion boundary in the mesh");
    std::unordered_set<std::uint64_t> edges;
    for (const auto& t : tri.triangles())
      for (int i = 0; i < 3; ++i) edges.insert(detail::edge_key(t.v[i], t.v[(i + 1) % 3]));
    std::vector<int> next;
    bool missing = false;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i], b = loop[(i + 1) % loop.size()];
      next.push_back(a);
      if (edges.count(detail::edge_key(a, b))) {
        tri.constrain(a, b);
      } else {
        missing = true;
        const Point2 m = 0.5 * (tri.points()[a] + tri.points()[b]);
        next.push_back(tri.insert(m));
      }
    }
    loop = std::move(next);
    if (!missing) break;
  }

  // Split oversized triangles (the irregular band along the boundaries) at
  // their centroids.
  for (int pass = 0; pass < 20; ++pass) {
    std::vector<Point2> centroids;
    const auto& pts = tri.points();
    for (const auto& t : tri.triangles()) {
      const Point2 a = pts[t.v[0]], b = pts[t.v[1]], c = pts[t.v[2]];
      if (std::max({distance(a, b), distance(b, c), distance(c, a)}) > h_target * (1.0 + 1e-9))
        centroids.push_back((1.0 / 3.0) * (a + b + c));
    }
    if (centroids.empty()) break;
    for (const auto& c : centroids) tri.insert(c);
  }

  Mesh mesh;
  mesh.nodes = tri.points();
  for (const auto& t : tri.triangles()) {
    mesh.triangles.push_back(t.v);
    const Point2 c = (1.0 / 3.0) * (mesh.nodes[t.v[0]] + mesh.nodes[t.v[1]] + mesh.nodes[t.v[2]]);
    bool inside = true;
    for (std::size_t i = 0; i < incl.size(); ++i) inside = inside && orient(incl.vertex(i), incl.vertex(i + 1), c) > 0.0;
    mesh.regions.push_back(inside ? Region::inside : Region::outside);
  }
  const int nb = static_cast<int>(outer.size());
  for (int i = 0; i < nb; ++i) {
    const int side = outer_side[i];
    mesh.boundary.push_back({i, (i + 1) % nb, omega.edge_normal(side), side});
  }
  mesh.interface_loop = std::move(loop);
  return mesh;
}

// Structural checks: positive triangles, conforming adjacency, single
// counter-clockwise boundary loop matching the unpaired edges.
inline void validate_mesh(const Mesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(mesh.triangle_area(t) > 0.0)) fail(ErrorKind::mesh, "mesh has an inverted or degenerate triangle");
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) ++count[detail::edge_key(tri[i], tri[(i + 1) % 3])];
  }
  std::size_t unpaired = 0;
  for (const auto& [key, c] : count) {
    if (c > 2) fail(ErrorKind::mesh, "mesh edge shared by more than two triangles");
    if (c == 1) ++unpaired;
  }
  if (mesh.boundary.size() != unpaired) fail(ErrorKind::mesh, "boundary loop does not match the mesh boundary");
  double twice_area = 0.0;
  for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
    const auto& e = mesh.boundary[i];
    const auto& next = mesh.boundary[(i + 1) % mesh.boundary.size()];
    if (e.b != next.a) fail(ErrorKind::mesh, "boundary edges do not form a closed loop");
    if (count[detail::edge_key(e.a, e.b)] != 1) fail(ErrorKind::mesh, "boundary loop edge is not a mesh boundary edge");
    twice_area += cross(mesh.nodes[e.a], mesh.nodes[e.b]);
  }
  if (!(twice_area > 0.0)) fail(ErrorKind::mesh, "boundary loop is not counter-clockwise");
}

// True when every consecutive pair of the interface loop is a mesh edge and
// separates an inside triangle from an outside one.
inline bool interface_resolved(const Mesh& mesh, const Polygon& inclusion) {
  if (mesh.interface_loop.size() < 3) return false;
  std::unordered_map<std::uint64_t, std::pair<int, int>> sides;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      auto& s = sides[detail::edge_key(tri[i], tri[(i + 1) % 3])];
      (mesh.regions[t] == Region::inside ? s.first : s.second)++;
    }
  }
  for (std::size_t i = 0; i < mesh.interface_loop.size(); ++i) {
    const int a = mesh.interface_loop[i], b = mesh.interface_loop[(i + 1) % mesh.interface_loop.size()];
    auto it = sides.find(detail::edge_key(a, b));
    if (it == sides.end() || it->second.first != 1 || it->second.second != 1) return false;
  }
  for (const auto& v : inclusion.vertices()) {
    bool found = false;
    for (int n : mesh.interface_loop) found = found || mesh.nodes[n] == v;
    if (!found) return false;
  }
  return true;
}

}  // namespace enclosure
