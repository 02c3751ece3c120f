#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "enclosure/geometry.hpp"

using namespace enclosure;

namespace {

const Polygon square = axis_square(0.5);

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::config;
}

// Dense sampling of the polygon boundary.
std::vector<Point2> boundary_samples(const Polygon& p, int per_edge) {
  std::vector<Point2> s;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (int j = 0; j < per_edge; ++j) s.push_back(p.vertex(i) + (static_cast<double>(j) / per_edge) * (p.vertex(i + 1) - p.vertex(i)));
  return s;
}

}  // namespace

TEST(Direction, PerpendicularConvention) {
  for (double phi : {0.0, 0.3, pi / 2, 2.0, -1.1, 5.9}) {
    const Direction d(phi);
    const Point2 w = d.omega(), wp = d.omega_perp();
    EXPECT_NEAR(norm(w), 1.0, 1e-15);
    EXPECT_NEAR(norm(wp), 1.0, 1e-15);
    EXPECT_NEAR(dot(w, wp), 0.0, 1e-15);
    EXPECT_NEAR(cross(w, wp), -1.0, 1e-15);
  }
}

TEST(Polygon, RejectsMalformedInput) {
  EXPECT_EQ(kind_of([] { Polygon({{0, 0}, {1, 0}}); }), ErrorKind::structural);
  EXPECT_EQ(kind_of([] { Polygon({{0, 0}, {0, 1}, {1, 0}}); }), ErrorKind::structural);  // clockwise
  EXPECT_EQ(kind_of([] { Polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}); }), ErrorKind::structural);
  EXPECT_EQ(kind_of([] { Polygon({{0, 0}, {2, 0}, {0, 1}, {2, 1}}); }), ErrorKind::structural);  // bow tie
}

TEST(SupportFunction, Examples) {
  EXPECT_DOUBLE_EQ(support_function(square, Direction(0.0)), 0.5);
  EXPECT_NEAR(support_function(square, Direction(pi / 4)), std::sqrt(0.5), 1e-15);
  const Polygon tri({{0, 0}, {1, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(support_function(tri, Direction(pi / 2)), 1.0);
}

TEST(SupportFunction, MatchesDenseSamplingAndScales) {
  const Polygon p({{-0.4, -0.35}, {0.6, -0.2}, {0.7, 0.3}, {0.0, 0.55}, {-0.5, 0.1}});
  const auto pts = boundary_samples(p, 200);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
  for (int i = 0; i < 200; ++i) {
    const Direction d(ang(rng));
    double brute = -1e300;
    for (const auto& x : pts) brute = std::max(brute, dot(x, d.omega()));
    EXPECT_NEAR(support_function(p, d), brute, 1e-12 * p.diameter());
    EXPECT_NEAR(support_function(p.scaled(2.5), d), 2.5 * support_function(p, d), 1e-12);
  }
}

TEST(Regularity, Examples) {
  EXPECT_FALSE(is_regular(square, Direction(0.0)));
  EXPECT_TRUE(is_regular(square, Direction(pi / 4)));
  EXPECT_TRUE(is_regular(square, Direction(pi / 6)));
  EXPECT_DOUBLE_EQ(regularity_margin(square, Direction(0.0)), 0.0);
  EXPECT_GT(regularity_margin(square, Direction(pi / 4)), 0.0);
}

TEST(Regularity, FailsOnlyOnEdgeNormals) {
  // Edge normals of both polygons lie on the scan grid.
  for (const auto& p : {square, regular_polygon(8, 1.0)}) {
    int failures = 0;
    for (int i = 0; i < 10000; ++i) failures += is_regular(p, Direction(2.0 * pi * i / 10000)) ? 0 : 1;
    EXPECT_EQ(failures, static_cast<int>(p.size()));
  }
}

TEST(VertexFrame, SquareDiagonal) {
  const auto f = vertex_frame(square, Direction(pi / 4));
  EXPECT_EQ(f.x0, (Point2{0.5, 0.5}));
  EXPECT_NEAR(f.theta, 1.5 * pi, 1e-14);
  EXPECT_NEAR(f.p, -pi / 4, 1e-14);
  EXPECT_NEAR(f.q, -3 * pi / 4, 1e-14);
  EXPECT_NEAR(f.p + f.theta, 2 * pi + f.q, 1e-14);
}

TEST(VertexFrame, EdgeDirectionsMatchFrame) {
  // Brute force: the frame angles reproduce the incident edges.
  const Polygon p({{-0.4, -0.35}, {0.6, -0.2}, {0.7, 0.3}, {0.0, 0.55}, {-0.5, 0.1}});
  for (int i = 0; i < 720; ++i) {
    const Direction d(2.0 * pi * (i + 0.37) / 720);
    if (!is_regular(p, d)) continue;
    const auto f = vertex_frame(p, d);
    EXPECT_GT(f.theta, pi);
    EXPECT_LT(f.theta, 2 * pi);
    EXPECT_LT(-pi, f.q);
    EXPECT_LT(f.q, f.p);
    EXPECT_LT(f.p, 0.0);
    EXPECT_NEAR(f.p - f.q, 2 * pi - f.theta, 1e-12);
    const Point2 w = d.omega(), wp = d.omega_perp();
    for (double a : {f.p, f.q}) {
      const Point2 dir = std::cos(a) * wp + std::sin(a) * w;
      const Point2 e1 = p.vertex(f.vertex_index + 1) - f.x0, e2 = p.vertex(f.vertex_index + p.size() - 1) - f.x0;
      const double c1 = dot(dir, e1) / norm(e1), c2 = dot(dir, e2) / norm(e2);
      EXPECT_NEAR(std::max(c1, c2), 1.0, 1e-12);
    }
    EXPECT_NEAR(norm(f.a), 1.0, 1e-14);
    EXPECT_NEAR(dot(f.a, f.a_perp), 0.0, 1e-14);
  }
}

TEST(VertexFrame, HexagonAndIrregular) {
  const Polygon hex = regular_polygon(6, 1.0);
  for (double phi : {0.1, 0.5, 2.0, 4.0}) EXPECT_NEAR(vertex_frame(hex, Direction(phi)).theta, 4 * pi / 3, 1e-12);
  for (double phi : {pi / 3, 0.7}) EXPECT_NEAR(vertex_frame(square, Direction(phi)).theta, 1.5 * pi, 1e-12);
  try {
    vertex_frame(square, Direction(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::regularity);
  }
}

TEST(HullFromSupport, Examples) {
  std::vector<SupportSample> four;
  for (int i = 0; i < 4; ++i) four.push_back({Direction(i * pi / 2), 0.5});
  EXPECT_NEAR(hausdorff_distance(hull_from_support(four), square), 0.0, 1e-12);

  std::vector<SupportSample> eight;
  for (int i = 0; i < 8; ++i) eight.push_back({Direction(i * pi / 4), i % 2 ? std::sqrt(0.5) : 0.5});
  const Polygon h8 = hull_from_support(eight);
  EXPECT_EQ(h8.size(), 4u);
  EXPECT_NEAR(hausdorff_distance(h8, square), 0.0, 1e-12);

  // Three lines tangent to the unit circle: vertices at distance 2.
  std::vector<SupportSample> three;
  for (int i = 0; i < 3; ++i) three.push_back({Direction(2 * pi * i / 3), 1.0});
  const Polygon tri = hull_from_support(three);
  ASSERT_EQ(tri.size(), 3u);
  for (const auto& v : tri.vertices()) EXPECT_NEAR(norm(v), 2.0, 1e-12);
  EXPECT_NEAR(tri.area(), 3.0 * std::sqrt(3.0), 1e-12);
}

TEST(HullFromSupport, Errors) {
  std::vector<SupportSample> half{{Direction(0.0), 1.0}, {Direction(1.0), 1.0}, {Direction(2.0), 1.0}};
  EXPECT_EQ(kind_of([&] { hull_from_support(half); }), ErrorKind::coverage);
  std::vector<SupportSample> empty{{Direction(0.0), -1.0}, {Direction(2 * pi / 3), -1.0}, {Direction(4 * pi / 3), -1.0}};
  EXPECT_EQ(kind_of([&] { hull_from_support(empty); }), ErrorKind::inconsistency);
}

TEST(HullFromSupport, ContainsPolygonAndReproducesIt) {
  const Polygon p({{-0.4, -0.35}, {0.6, -0.2}, {0.7, 0.3}, {0.0, 0.55}, {-0.5, 0.1}});
  std::vector<SupportSample> normals;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2 n = p.edge_normal(i);
    const Direction d(std::atan2(n.y, n.x));
    normals.push_back({d, support_function(p, d)});
  }
  EXPECT_NEAR(hausdorff_distance(hull_from_support(normals), p), 0.0, 1e-9);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SupportSample> s;
    for (int i = 0; i < 12; ++i) s.push_back({Direction(2 * pi * i / 12 + 0.2 * ang(rng) / (2 * pi)), 0.0});
    for (auto& x : s) x.h = support_function(p, x.direction);
    const Polygon h = hull_from_support(s);
    EXPECT_TRUE(h.is_convex());
    for (const auto& v : p.vertices()) EXPECT_TRUE(h.contains(v, 1e-12));
  }
}

TEST(HullFromSupport, MoreDirectionsNeverEnlarge) {
  std::vector<SupportSample> s;
  double prev = 1e300;
  for (int i = 0; i < 4; ++i) s.push_back({Direction(i * pi / 2 + 0.3), support_function(square, Direction(i * pi / 2 + 0.3))});
  for (int i = 0; i < 20; ++i) {
    const double a = hull_from_support(s).area();
    EXPECT_LE(a, prev + 1e-12);
    prev = a;
    const Direction d(0.123 + 2.1 * i);
    s.push_back({d, support_function(square, d)});
  }
}

TEST(Hausdorff, Examples) {
  EXPECT_DOUBLE_EQ(hausdorff_distance(square, square), 0.0);
  EXPECT_NEAR(hausdorff_distance(square, square.translated({0.1, 0.0})), 0.1, 1e-12);
  EXPECT_NEAR(hausdorff_distance(square, axis_square(0.6)), 0.1 * std::sqrt(2.0), 1e-12);
}

TEST(Hausdorff, MatchesDenseSampling) {
  const Polygon a({{-0.4, -0.35}, {0.6, -0.2}, {0.7, 0.3}, {0.0, 0.55}, {-0.5, 0.1}});
  const Polygon b = regular_polygon(7, 0.6, {0.05, -0.02}, 0.3);
  auto directed = [](const Polygon& p, const Polygon& q) {
    double d = 0.0;
    for (const auto& x : boundary_samples(p, 400)) d = std::max(d, q.contains(x) ? 0.0 : q.boundary_distance(x));
    return d;
  };
  EXPECT_NEAR(hausdorff_distance(a, b), std::max(directed(a, b), directed(b, a)), 1e-3);
}
