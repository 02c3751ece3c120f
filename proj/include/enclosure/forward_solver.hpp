#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "enclosure/errors.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/mesh.hpp"
#include "enclosure/scene.hpp"

namespace enclosure {

// Prescribed current sampled on the mesh boundary: one (start, end) pair per
// boundary edge, linear along the edge. Values may jump at polygon corners.
struct BoundaryCurrent {
  std::vector<std::array<double, 2>> edge_values;

  // Integral of g over the boundary (exact for edge-linear g).
  double total(const Mesh& mesh) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
      const auto& e = mesh.boundary[i];
      s += 0.5 * distance(mesh.nodes[e.a], mesh.nodes[e.b]) * (edge_values[i][0] + edge_values[i][1]);
    }
    return s;
  }
};

inline double boundary_length(const Mesh& mesh) {
  double len = 0.0;
  for (const auto& e : mesh.boundary) len += distance(mesh.nodes[e.a], mesh.nodes[e.b]);
  return len;
}

// Samples a current description on the mesh boundary. Mode currents use the
// polar angle about `center` and have their boundary mean removed.
inline BoundaryCurrent sample_current(const Mesh& mesh, const CurrentSpec& spec, Point2 center = {}) {
  BoundaryCurrent g;
  g.edge_values.reserve(mesh.boundary.size());
  for (const auto& e : mesh.boundary) {
    if (spec.type == CurrentSpec::Type::linear) {
      const double v = dot(e.normal, spec.direction);
      g.edge_values.push_back({v, v});
    } else {
      auto at = [&](int node) {
        const Point2 r = mesh.nodes[node] - center;
        return std::cos(spec.n * std::atan2(r.y, r.x));
      };
      g.edge_values.push_back({at(e.a), at(e.b)});
    }
  }
  if (spec.type == CurrentSpec::Type::mode) {
    const double mean = g.total(mesh) / boundary_length(mesh);
    for (auto& v : g.edge_values) {
      v[0] -= mean;
      v[1] -= mean;
    }
  }
  return g;
}

struct SolverOptions {
  double tolerance = 1e-12;  // relative residual of the linear solve
  int max_iterations = 0;    // 0: 10 * number of unknowns
};

struct FieldSolution {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> u;  // nodal values, zero mean over the boundary
  double k = 1.0;
  int iterations = 0;
  double relative_residual = 0.0;  // || K u - f || / || f || on the full system
};

namespace detail {

inline Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh, double k) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point2 p0 = mesh.nodes[tri[0]], p1 = mesh.nodes[tri[1]], p2 = mesh.nodes[tri[2]];
    const double area = 0.5 * orient(p0, p1, p2);
    const double gamma = mesh.regions[t] == Region::inside ? k : 1.0;
    // Gradients of the barycentric functions times 2 * area.
    const std::array<Point2, 3> g{Point2{p1.y - p2.y, p2.x - p1.x}, Point2{p2.y - p0.y, p0.x - p2.x},
                                  Point2{p0.y - p1.y, p1.x - p0.x}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], gamma * dot(g[i], g[j]) / (4.0 * area));
  }
  const auto n = static_cast<Eigen::Index>(mesh.nodes.size());
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

inline Eigen::VectorXd assemble_load(const Mesh& mesh, const BoundaryCurrent& g) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.nodes.size()));
  for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
    const auto& e = mesh.boundary[i];
    const double len = distance(mesh.nodes[e.a], mesh.nodes[e.b]);
    const double ga = g.edge_values[i][0], gb = g.edge_values[i][1];
    f[e.a] += len * (2.0 * ga + gb) / 6.0;
    f[e.b] += len * (ga + 2.0 * gb) / 6.0;
  }
  return f;
}

// Trapezoidal weight of each boundary loop node.
inline std::vector<double> boundary_weights(const Mesh& mesh) {
  std::vector<double> w(mesh.boundary.size(), 0.0);
  const std::size_t n = mesh.boundary.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = mesh.boundary[i];
    const double half = 0.5 * distance(mesh.nodes[e.a], mesh.nodes[e.b]);
    w[i] += half;
    w[(i + 1) % n] += half;
  }
  return w;
}

}  // namespace detail

// Piecewise-linear Galerkin solution of div(gamma grad u) = 0 with
// gamma = k on the inclusion, 1 elsewhere, and Neumann data g.
inline FieldSolution solve_transmission(std::shared_ptr<const Mesh> mesh, double k, const BoundaryCurrent& g,
                                        const SolverOptions& opts = {}) {
  if (!(k > 0.0)) fail(ErrorKind::config, "conductivity contrast must be positive");
  if (g.edge_values.size() != mesh->boundary.size())
    fail(ErrorKind::data, "current does not match the mesh boundary");
  double gmax = 0.0;
  for (const auto& v : g.edge_values) gmax = std::max({gmax, std::abs(v[0]), std::abs(v[1])});
  const double mean = g.total(*mesh) / boundary_length(*mesh);
  if (std::abs(mean) > 1e-10 * std::max(gmax, 1.0))
    fail(ErrorKind::data, "prescribed current does not have zero mean");

  FieldSolution sol;
  sol.mesh = mesh;
  sol.k = k;
  const auto n = static_cast<Eigen::Index>(mesh->nodes.size());
  sol.u.assign(static_cast<std::size_t>(n), 0.0);
  if (gmax == 0.0) return sol;

  const Eigen::SparseMatrix<double> K = detail::assemble_stiffness(*mesh, k);
  const Eigen::VectorXd f = detail::assemble_load(*mesh, g);

  // Fix the additive constant by eliminating node 0.
  const Eigen::SparseMatrix<double> Kr = K.bottomRightCorner(n - 1, n - 1);
  const Eigen::VectorXd fr = f.tail(n - 1);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(opts.tolerance);
  cg.setMaxIterations(opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * n));
  cg.compute(Kr);
  Eigen::VectorXd ur = cg.solve(fr);
  if (cg.info() != Eigen::Success) fail(ErrorKind::numeric, "conjugate gradient did not converge");
  sol.iterations = static_cast<int>(cg.iterations());

  Eigen::VectorXd u(n);
  u[0] = 0.0;
  u.tail(n - 1) = ur;
  const auto w = detail::boundary_weights(*mesh);
  double wsum = 0.0, avg = 0.0;
  for (std::size_t i = 0; i < mesh->boundary.size(); ++i) {
    avg += w[i] * u[mesh->boundary[i].a];
    wsum += w[i];
  }
  avg /= wsum;
  u.array() -= avg;
  sol.relative_residual = (K * u - f).norm() / f.norm();
  if (!(sol.relative_residual <= 1e-10)) fail(ErrorKind::numeric, "linear solve did not reach the residual target");
  sol.u.assign(u.data(), u.data() + n);
  return sol;
}

// Weighted Dirichlet integral of the discrete field.
inline double field_energy(const FieldSolution& sol) {
  const auto K = detail::assemble_stiffness(*sol.mesh, sol.k);
  const Eigen::Map<const Eigen::VectorXd> u(sol.u.data(), static_cast<Eigen::Index>(sol.u.size()));
  return u.dot(K * u);
}

// Boundary samples of one measurement. `g_edges` holds the exact edge-linear
// current; `g` is its node average, kept for tabulation.
struct CauchyData {
  std::vector<Point2> boundary_nodes;        // closed counter-clockwise loop
  std::vector<double> u;                     // voltage per node
  std::vector<double> g;                     // current per node
  std::vector<std::array<double, 2>> g_edges;  // current at (start, end) of edge i -> i+1
  std::vector<double> weights;               // trapezoidal quadrature weights
  double u_noise_sigma = 0.0;                // std of additive noise on u, if known
  std::string scene_digest;

  std::size_t size() const { return boundary_nodes.size(); }

  // Integral of g over the boundary.
  double current_total() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double len = distance(boundary_nodes[i], boundary_nodes[(i + 1) % size()]);
      s += 0.5 * len * (g_edges[i][0] + g_edges[i][1]);
    }
    return s;
  }
};

// Reads the voltage trace off the boundary loop; the current is the
// prescribed data, not a post-processed derivative.
inline CauchyData extract_cauchy(const FieldSolution& sol, const BoundaryCurrent& g) {
  const Mesh& mesh = *sol.mesh;
  validate_mesh(mesh);
  if (g.edge_values.size() != mesh.boundary.size()) fail(ErrorKind::data, "current does not match the mesh boundary");
  CauchyData cd;
  const std::size_t n = mesh.boundary.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int node = mesh.boundary[i].a;
    cd.boundary_nodes.push_back(mesh.nodes[node]);
    cd.u.push_back(sol.u[node]);
    cd.g.push_back(0.5 * (g.edge_values[i][0] + g.edge_values[(i + n - 1) % n][1]));
  }
  cd.g_edges = g.edge_values;
  cd.weights = detail::boundary_weights(mesh);
  return cd;
}

// Mesh, solve and boundary sampling for one scene.
struct Simulation {
  std::shared_ptr<const Mesh> mesh;
  BoundaryCurrent current;
  FieldSolution solution;
  CauchyData data;
};

inline Simulation simulate(const Scene& scene, double h_target, int grading_depth, const SolverOptions& opts = {}) {
  Simulation sim;
  sim.mesh = std::make_shared<const Mesh>(build_mesh(scene, h_target, grading_depth));
  sim.current = sample_current(*sim.mesh, scene.current, scene.omega.centroid());
  sim.solution = solve_transmission(sim.mesh, scene.k, sim.current, opts);
  sim.data = extract_cauchy(sim.solution, sim.current);
  return sim;
}

// Exact solution for concentric discs: conductivity k for r < rho, 1 for
// rho < r < R, Neumann data cos(n theta) at r = R.
//   inside:  A r^n cos(n theta)
//   outside: (B r^n + C r^-n) cos(n theta)
struct DiscSolution {
  double R = 0.0, rho = 0.0, k = 1.0;
  int n = 1;
  double A = 0.0, B = 0.0, C = 0.0;

  double radial(double r) const {
    const double rn = std::pow(r, n);
    return r < rho ? A * rn : B * rn + C / rn;
  }

  double operator()(Point2 x) const { return radial(norm(x)) * std::cos(n * std::atan2(x.y, x.x)); }

  double trace_amplitude() const { return radial(R); }
};

inline DiscSolution analytic_disc(double R, double rho, double k, int n) {
  if (!(rho > 0.0) || !(rho < R)) fail(ErrorKind::geometry, "need 0 < rho < R");
  if (n < 1) fail(ErrorKind::config, "mode index must be >= 1");
  if (!(k > 0.0)) fail(ErrorKind::config, "conductivity contrast must be positive");
  // Continuity of u and k du/dr at rho:  A = B + C rho^-2n,  k A = B - C rho^-2n.
  // Outer flux:  n (B R^(n-1) - C R^(-n-1)) = 1.
  DiscSolution s{R, rho, k, n};
  const double ratio = (1.0 - k) / (1.0 + k) * std::pow(rho, 2 * n);  // C / B
  s.B = 1.0 / (n * (std::pow(R, n - 1) - ratio * std::pow(R, -n - 1)));
  s.C = ratio * s.B;
  s.A = s.B + s.C * std::pow(rho, -2 * n);
  return s;
}

// Exact Cauchy data of the disc solution sampled on a regular polygon
// inscribed in the outer circle.
inline std::pair<CauchyData, DiscSolution> analytic_disc_cauchy(double R, double rho, double k, int n,
                                                                std::size_t sides = 64) {
  const DiscSolution s = analytic_disc(R, rho, k, n);
  const Polygon poly = regular_polygon(sides, R);
  CauchyData cd;
  for (std::size_t i = 0; i < sides; ++i) {
    const Point2 p = poly[i];
    const double theta = std::atan2(p.y, p.x);
    cd.boundary_nodes.push_back(p);
    cd.u.push_back(s(p));
    cd.g.push_back(std::cos(n * theta));
  }
  for (std::size_t i = 0; i < sides; ++i) {
    cd.g_edges.push_back({cd.g[i], cd.g[(i + 1) % sides]});
    const double half = 0.5 * distance(poly.vertex(i), poly.vertex(i + 1));
    cd.weights.push_back(half + 0.5 * distance(poly.vertex(i + sides - 1), poly.vertex(i)));
  }
  return {cd, s};
}

}  // namespace enclosure
