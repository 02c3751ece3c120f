#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "enclosure/errors.hpp"
#include "enclosure/forward_solver.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/mesh.hpp"

namespace enclosure {

using complex = std::complex<double>;

struct ProbeParams {
  Direction direction;
  double tau = 1.0;
  double t = 0.0;
};

inline constexpr double probe_exponent_limit = 700.0;

// Shifted probe e^{-tau t} v(x) = exp(tau ((x.w - t) + i x.w_perp)),
// evaluated as a single exponential.
inline complex probe_eval(const ProbeParams& pp, Point2 x) {
  const double re = pp.tau * (dot(x, pp.direction.omega()) - pp.t);
  if (re > probe_exponent_limit) fail(ErrorKind::range, "probe exponent overflows; shift t closer to the data");
  return std::exp(complex(re, pp.tau * dot(x, pp.direction.omega_perp())));
}

// Gradient of the shifted probe: tau (w + i w_perp) times its value.
inline std::array<complex, 2> probe_gradient(const ProbeParams& pp, Point2 x) {
  const complex v = probe_eval(pp, x);
  const Point2 w = pp.direction.omega(), wp = pp.direction.omega_perp();
  return {pp.tau * complex(w.x, wp.x) * v, pp.tau * complex(w.y, wp.y) * v};
}

// Normal derivative factor: d(probe)/d(nu) = tau (w + i w_perp) . nu * probe.
inline complex probe_normal_factor(const ProbeParams& pp, Point2 nu) {
  return pp.tau * complex(dot(pp.direction.omega(), nu), dot(pp.direction.omega_perp(), nu));
}

namespace detail {

// E0(z) = int_0^1 e^{z s} ds,  E1(z) = int_0^1 s e^{z s} ds, for |z| <= 1.
inline std::pair<complex, complex> exp_moments(complex z) {
  complex e0 = 0.0, e1 = 0.0, term = 1.0;  // term = z^n / n!
  for (int n = 0; n < 30; ++n) {
    e0 += term / static_cast<double>(n + 1);
    e1 += term / static_cast<double>(n + 2);
    term *= z / static_cast<double>(n + 1);
    if (std::abs(term) < 1e-18) break;
  }
  return {e0, e1};
}

struct SegmentIntegral {
  complex value;     // int f(s) probe(x(s)) ds
  double magnitude;  // int |f(s)| |probe(x(s))| ds, piecewise estimate
};

// Integral of an edge-linear f (fa at a, fb at b) against the shifted probe
// along the segment a -> b. The segment is cut so that tau * piece <= 0.5 and
// each piece is integrated exactly (linear times exponential).
inline SegmentIntegral probe_segment_integral(const ProbeParams& pp, Point2 a, Point2 b, double fa, double fb) {
  const double len = distance(a, b);
  SegmentIntegral out{0.0, 0.0};
  if (len == 0.0) return out;
  const Point2 e = (1.0 / len) * (b - a);
  const complex c = pp.tau * complex(dot(e, pp.direction.omega()), dot(e, pp.direction.omega_perp()));
  const int pieces = std::max(1, static_cast<int>(std::ceil(pp.tau * len / 0.5)));
  const double piece = len / pieces;
  const auto [e0, e1] = exp_moments(c * piece);
  for (int k = 0; k < pieces; ++k) {
    const double s0 = static_cast<double>(k) / pieces, s1 = static_cast<double>(k + 1) / pieces;
    const double f0 = fa + (fb - fa) * s0, f1 = fa + (fb - fa) * s1;
    const complex v0 = probe_eval(pp, a + (len * s0) * e);
    out.value += piece * v0 * (f0 * (e0 - e1) + f1 * e1);
    out.magnitude += piece * std::abs(v0) * std::exp(std::max(0.0, c.real() * piece)) * std::max(std::abs(f0), std::abs(f1));
  }
  return out;
}

}  // namespace detail

struct IndicatorValue {
  complex value;
  double noise_floor = 0.0;  // rounding plus known data noise
};

// Relative accuracy attributed to clean data in the boundary pairing.
inline constexpr double indicator_rounding = 1e-14;

// I(tau, t) = e^{-tau t} ( <g, v> - <dv/dnu, u> ) over the outer boundary,
// from Cauchy data alone. The pairing is summed at the fixed reference shift
// max x.omega over the data, so that probe values stay at most 1, and then
// rescaled to t by a single factor; values at different t agree to rounding
// of that factor.
inline IndicatorValue indicator_boundary(const CauchyData& cd, const ProbeParams& pp) {
  const std::size_t n = cd.size();
  if (n < 3 || cd.u.size() != n || cd.g_edges.size() != n) fail(ErrorKind::data, "empty or inconsistent Cauchy data");
  double t_ref = -std::numeric_limits<double>::infinity();
  for (const auto& x : cd.boundary_nodes) t_ref = std::max(t_ref, dot(x, pp.direction.omega()));
  if (pp.tau * (t_ref - pp.t) > probe_exponent_limit)
    fail(ErrorKind::range, "probe exponent overflows; shift t closer to the data");
  const ProbeParams ref{pp.direction, pp.tau, t_ref};
  complex total = 0.0;
  double magnitude = 0.0;
  double noise_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = cd.boundary_nodes[i], b = cd.boundary_nodes[(i + 1) % n];
    const double len = distance(a, b);
    const Point2 nu{(b.y - a.y) / len, -(b.x - a.x) / len};
    const complex dn = probe_normal_factor(ref, nu);
    const auto flux = detail::probe_segment_integral(ref, a, b, cd.g_edges[i][0], cd.g_edges[i][1]);
    const auto volt = detail::probe_segment_integral(ref, a, b, cd.u[i], cd.u[(i + 1) % n]);
    total += flux.value - dn * volt.value;
    magnitude += flux.magnitude + pp.tau * volt.magnitude;
  }
  if (cd.u_noise_sigma > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = pp.tau * std::abs(probe_eval(ref, cd.boundary_nodes[i])) * cd.weights[i];
      noise_sq += s * s;
    }
  }
  const double scale = std::exp(pp.tau * (t_ref - pp.t));
  return {scale * total, scale * (indicator_rounding * magnitude + cd.u_noise_sigma * std::sqrt(noise_sq))};
}

// Inclusion-side form of the indicator, using the interior field:
//   e^{-tau t} (1 - k) int_{dD} (u - lambda) dv/dnu,
// with nu pointing into the inclusion. Test-side oracle only.
inline IndicatorValue indicator_inclusion_oracle(const FieldSolution& sol, const Polygon& inclusion, double k,
                                                 const ProbeParams& pp, double lambda) {
  const Mesh& mesh = *sol.mesh;
  if (!interface_resolved(mesh, inclusion)) fail(ErrorKind::mesh, "inclusion boundary is not resolved by the mesh");
  const auto& loop = mesh.interface_loop;
  const std::size_t n = loop.size();
  complex total = 0.0;
  double magnitude = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int ia = loop[i], ib = loop[(i + 1) % n];
    const Point2 a = mesh.nodes[ia], b = mesh.nodes[ib];
    const double len = distance(a, b);
    const Point2 inward{-(b.y - a.y) / len, (b.x - a.x) / len};
    const complex dn = probe_normal_factor(pp, inward);
    const auto s = detail::probe_segment_integral(pp, a, b, sol.u[ia] - lambda, sol.u[ib] - lambda);
    total += dn * s.value;
    magnitude += pp.tau * s.magnitude;
  }
  return {(1.0 - k) * total, indicator_rounding * std::abs(1.0 - k) * magnitude};
}

struct IndicatorSample {
  double tau = 0.0;
  complex value;
  double noise_floor = 0.0;
};

struct IndicatorSeries {
  Direction direction;
  double t = 0.0;
  std::vector<IndicatorSample> samples;  // strictly increasing tau
};

inline void check_tau_grid(std::span<const double> taus) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0)) fail(ErrorKind::config, "tau values must be positive");
    if (i > 0 && !(taus[i] > taus[i - 1])) fail(ErrorKind::config, "tau grid must be strictly increasing");
  }
}

inline IndicatorSeries indicator_series(const CauchyData& cd, const Direction& d, double t, std::span<const double> taus) {
  check_tau_grid(taus);
  IndicatorSeries s{d, t, {}};
  for (double tau : taus) {
    const auto v = indicator_boundary(cd, {d, tau, t});
    s.samples.push_back({tau, v.value, v.noise_floor});
  }
  return s;
}

inline IndicatorSeries oracle_series(const FieldSolution& sol, const Polygon& inclusion, double k, const Direction& d,
                                     double t, std::span<const double> taus, double lambda = 0.0) {
  check_tau_grid(taus);
  IndicatorSeries s{d, t, {}};
  for (double tau : taus) {
    const auto v = indicator_inclusion_oracle(sol, inclusion, k, {d, tau, t}, lambda);
    s.samples.push_back({tau, v.value, v.noise_floor});
  }
  return s;
}

// Boundary-side values lose about tau (h_Omega(w) - h_D(w)) nats to
// cancellation; trust requires that loss to stay within double precision.
inline double cancellation_cap(double h_domain, double h_inclusion, double digits_budget = 14.0) {
  return digits_budget * std::log(10.0) / std::max(h_domain - h_inclusion, 1e-12);
}

struct LaplaceIntegral {
  complex numeric;
  complex leading;
};

// int_0^eta r^mu exp(r tau (sin p + i cos p)) dr by quadrature, together
// with its large-tau leading term
//   tau^{-(1+mu)} i e^{i pi mu / 2} e^{i p (1 + mu)} Gamma(1 + mu).
inline LaplaceIntegral laplace_corner_integral(double mu, double p, double eta, double tau) {
  if (!(p > -pi && p < 0.0)) fail(ErrorKind::config, "corner angle must lie in (-pi, 0)");
  if (!(mu > 0.0) || !(eta > 0.0) || !(tau > 0.0)) fail(ErrorKind::config, "mu, eta and tau must be positive");
  // Substitute s = r tau.
  const double upper = eta * tau;
  const double sp = std::sin(p), cp = std::cos(p);
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto part = [&](bool imag) {
    auto f = [&](double s) {
      const double m = std::pow(s, mu) * std::exp(s * sp);
      return imag ? m * std::sin(s * cp) : m * std::cos(s * cp);
    };
    // Split the range so each piece spans a bounded number of oscillations.
    const int pieces = std::max(1, static_cast<int>(std::ceil(upper / 4.0)));
    double sum = 0.0;
    for (int i = 0; i < pieces; ++i) {
      const double lo = upper * i / pieces, hi = upper * (i + 1) / pieces;
      sum += integrator.integrate(f, lo, hi, 1e-15);
    }
    return sum;
  };
  const double scale = std::pow(tau, -(1.0 + mu));
  const complex numeric = scale * complex(part(false), part(true));
  const complex i(0.0, 1.0);
  const complex leading =
      scale * i * std::exp(i * (pi * mu / 2.0)) * std::exp(i * (p * (1.0 + mu))) * std::tgamma(1.0 + mu);
  return {numeric, leading};
}

}  // namespace enclosure
