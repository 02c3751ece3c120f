#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "enclosure/forward_solver.hpp"
#include "enclosure/reconstruction.hpp"

using namespace enclosure;

namespace {

IndicatorSeries synthetic(double rate, double power, std::span<const double> taus, double t = 0.0) {
  IndicatorSeries s{Direction(0.0), t, {}};
  for (double tau : taus) s.samples.push_back({tau, complex(std::exp(rate * tau) * std::pow(tau, power), 0.0), 0.0});
  return s;
}

const Simulation& default_simulation() {
  static const Simulation sim = simulate(default_scene(), 0.08, 4);
  return sim;
}

}  // namespace

TEST(Grids, Shapes) {
  const auto g = geometric_grid(4.0, 13.0, 24);
  ASSERT_EQ(g.size(), 24u);
  EXPECT_DOUBLE_EQ(g.front(), 4.0);
  EXPECT_DOUBLE_EQ(g.back(), 13.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) EXPECT_NEAR(g[i] * g[i], g[i - 1] * g[i + 1], 1e-12);
  const auto u = uniform_grid(5.0, 40.0, 36);
  EXPECT_DOUBLE_EQ(u[1] - u[0], 1.0);
  EXPECT_THROW(geometric_grid(0.0, 1.0, 5), Error);
}

TEST(FitSupport, SyntheticPowerLaw) {
  const auto taus = uniform_grid(6.0, 14.0, 17);
  ReconstructionConfig plain;
  plain.prefactor_power = 0.0;
  const auto a = fit_support(synthetic(0.7, -0.9, taus), 10.0, plain);
  EXPECT_EQ(a.status, EstimateStatus::ok);
  EXPECT_GE(a.h_hat, 0.55);
  EXPECT_LE(a.h_hat, 0.72);
  // The prefactor compensation removes a tau^{-1} factor exactly.
  const auto b = fit_support(synthetic(0.7, -1.0, taus), 10.0);
  EXPECT_NEAR(b.h_hat, 0.7, 1e-12);
  EXPECT_NEAR(b.r_squared, 1.0, 1e-12);
}

TEST(FitSupport, ShiftInvariant) {
  const auto taus = geometric_grid(4.0, 13.0, 24);
  const auto a = fit_support(synthetic(0.7, -0.9, taus), 10.0);
  for (double t : {-0.5, 0.3, 0.7, 1.2}) {
    const auto b = fit_support(synthetic(0.7 - t, -0.9, taus, t), 10.0);
    EXPECT_NEAR(a.h_hat, b.h_hat, 1e-10);
    EXPECT_EQ(a.samples, b.samples);
  }
}

TEST(FitSupport, WindowStopsAtRateJump) {
  // Clean rate 0.7 up to tau = 9, then an error term growing at rate 5.
  const auto taus = uniform_grid(4.0, 13.0, 19);
  IndicatorSeries s{Direction(0.0), 0.0, {}};
  for (double tau : taus) {
    const double v = std::exp(0.7 * tau) / tau + 1e-12 * std::exp(5.0 * tau) * (tau > 9.0 ? 1.0 : 0.0);
    s.samples.push_back({tau, complex(v, 0.0), 0.0});
  }
  const auto e = fit_support(s, 10.0);
  EXPECT_LE(e.tau_max, 9.5);
  EXPECT_NEAR(e.h_hat, 0.7, 1e-6);
}

TEST(FitSupport, RejectsRatesBeyondTheData) {
  const auto taus = uniform_grid(4.0, 13.0, 19);
  const auto e = fit_support(synthetic(3.5, -1.0, taus), 3.0);
  EXPECT_EQ(e.status, EstimateStatus::indeterminate);
  IndicatorSeries floor = synthetic(0.7, -1.0, taus);
  for (auto& x : floor.samples) x.noise_floor = 1e9;
  EXPECT_THROW(fit_support(floor, 3.0), Error);
}

TEST(Noise, StatisticsAndDeterminism) {
  CauchyData cd;
  const Polygon poly = regular_polygon(256, 1.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    cd.boundary_nodes.push_back(poly[i]);
    cd.u.push_back(poly[i].x);
    cd.g.push_back(poly[i].x);
    cd.g_edges.push_back({poly[i].x, poly.vertex(i + 1).x});
    cd.weights.push_back(2 * pi / 256);
  }
  const auto a = add_noise(cd, 0.05, 11), b = add_noise(cd, 0.05, 11), c = add_noise(cd, 0.05, 12);
  EXPECT_EQ(a.u, b.u);
  EXPECT_NE(a.u, c.u);
  EXPECT_EQ(a.g, cd.g);
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < cd.size(); ++i) mean += (a.u[i] - cd.u[i]) / 256.0;
  for (std::size_t i = 0; i < cd.size(); ++i) var += std::pow(a.u[i] - cd.u[i] - mean, 2) / 255.0;
  EXPECT_NEAR(std::sqrt(var), 0.05, 0.2 * 0.05);
  EXPECT_LT(std::abs(mean), 4.0 * 0.05 / 16.0);
  EXPECT_DOUBLE_EQ(a.u_noise_sigma, 0.05);
  EXPECT_EQ(add_noise(cd, 0.0, 1).u, cd.u);
}

TEST(Reconstruction, DefaultSceneSupports) {
  const auto& sim = default_simulation();
  const Polygon& truth = default_scene().inclusion;
  ReconstructionConfig cfg;
  cfg.taus = geometric_grid(4.0, 13.0, 24);
  for (double phi : {pi / 8, pi / 4, 3 * pi / 8, 5 * pi / 4}) {
    const Direction d(phi);
    const auto e = estimate_support(sim.data, d, cfg.taus, 0.0, cfg);
    ASSERT_EQ(e.status, EstimateStatus::ok) << e.reason;
    EXPECT_NEAR(e.h_hat, support_function(truth, d), 0.05) << "phi " << phi;
    const auto shifted = estimate_support(sim.data, d, cfg.taus, 0.35, cfg);
    EXPECT_NEAR(shifted.h_hat, e.h_hat, 1e-10);
  }
}

TEST(Reconstruction, HullIsDeterministicAcrossThreadCounts) {
  const auto& sim = default_simulation();
  const Polygon truth = default_scene().inclusion;
  ReconstructionConfig one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = reconstruct_hull(sim.data, 16, one, &truth), b = reconstruct_hull(sim.data, 16, many, &truth);
  ASSERT_EQ(a.hull.size(), b.hull.size());
  for (std::size_t i = 0; i < a.hull.size(); ++i) EXPECT_EQ(a.hull[i], b.hull[i]);
  ASSERT_TRUE(a.metrics.has_value());
  EXPECT_EQ(a.metrics->hausdorff, b.metrics->hausdorff);
  // The hull contains the inclusion up to the support errors.
  for (const auto& v : truth.vertices()) EXPECT_LT(region_distance(v, a.hull), 0.05);
}

TEST(Reconstruction, ClassifySide) {
  const auto& sim = default_simulation();
  const Direction d(pi / 4);
  const double h = std::sqrt(0.5);
  const auto taus = geometric_grid(4.0, 13.0, 24);
  EXPECT_EQ(classify_side(sim.data, d, h - 0.3, taus), Side::grows);
  EXPECT_EQ(classify_side(sim.data, d, h + 0.3, taus), Side::decays);
}

TEST(Reconstruction, NoContrastIsIndeterminate) {
  Scene s = default_scene();
  s.k = 1.0;
  const auto sim = simulate(s, 0.16, 2);
  try {
    reconstruct_hull(sim.data, 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::coverage);
  }
  EXPECT_EQ(classify_side(sim.data, Direction(pi / 4), 0.0, geometric_grid(4.0, 13.0, 24)), Side::indeterminate);
}

TEST(Reconstruction, RejectsTooFewDirections) {
  try {
    reconstruct_hull(default_simulation().data, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}
