#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "enclosure/errors.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/probe_indicator.hpp"

namespace enclosure {

struct CornerParams {
  double k = 2.0;
  double theta = 1.5 * pi;  // outside angle

  CornerParams(double k_, double theta_) : k(k_), theta(theta_) {
    if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorKind::config, "contrast k must be positive");
    if (k == 1.0) fail(ErrorKind::config, "contrast k = 1 has no corner spectrum");
    if (!(theta > pi && theta < 2.0 * pi)) fail(ErrorKind::config, "outside angle must lie in (pi, 2 pi)");
  }

  // ((1 - k) / (1 + k))^2; the equation depends on k only through this.
  double contrast_sq() const {
    const double q = (1.0 - k) / (1.0 + k);
    return q * q;
  }
};

// Residual of the exponent equation divided by (1 + k)^2:
//   sin^2(pi mu) - q^2 sin^2((pi - Theta) mu).
inline double corner_residual(const CornerParams& cp, double mu) {
  const double a = std::sin(pi * mu), b = std::sin((pi - cp.theta) * mu);
  return a * a - cp.contrast_sq() * b * b;
}

inline double corner_residual_derivative(const CornerParams& cp, double mu) {
  const double w = pi - cp.theta;
  return pi * std::sin(2.0 * pi * mu) - cp.contrast_sq() * w * std::sin(2.0 * w * mu);
}

namespace detail {

template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline constexpr double corner_scan_step = 1e-3;

// Positive roots in (0, mu_max], ascending. Sign changes are bisected; double
// roots show up as local minima of |f| and are refined on f'.
inline std::vector<double> corner_exponents(const CornerParams& cp, double mu_max) {
  if (!(mu_max > 0.0) || mu_max > 10.0) fail(ErrorKind::config, "mu_max must lie in (0, 10]");
  auto f = [&](double mu) { return corner_residual(cp, mu); };
  auto df = [&](double mu) { return corner_residual_derivative(cp, mu); };
  const int steps = static_cast<int>(std::ceil(mu_max / corner_scan_step - 1e-9));
  auto grid = [&](int i) { return std::min(mu_max, i * corner_scan_step); };
  std::vector<double> roots;
  auto push = [&](double mu) {
    if (mu <= 0.5 * corner_scan_step || mu > mu_max) return;
    if (!roots.empty() && mu - roots.back() < 1e-9) return;
    roots.push_back(mu);
  };
  double prev = f(grid(1));
  for (int i = 1; i < steps; ++i) {
    const double a = grid(i), b = grid(i + 1);
    const double fa = prev, fb = f(b);
    if (fa == 0.0) {
      push(a);
    } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      push(detail::bisect(f, a, b, 1e-12));
    }
    // Local minimum of |f| at a grid point: candidate double root.
    if (i >= 2) {
      const double fl = std::abs(f(grid(i - 1)));
      if (std::abs(fa) <= fl && std::abs(fa) <= std::abs(fb) && std::abs(fa) > 0.0) {
        const double lo = grid(i - 1), hi = b;
        if ((df(lo) < 0.0) != (df(hi) < 0.0)) {
          const double mu = detail::bisect(df, lo, hi, 1e-12);
          if (std::abs(f(mu)) <= 1e-14) push(mu);
        }
      }
    }
    prev = fb;
  }
  if (f(mu_max) == 0.0) push(mu_max);
  return roots;
}

struct CornerSystem {
  std::array<std::array<double, 2>, 2> m_angle{};  // (A_e, B_e) from (A_i, B_i) by the 2 pi rotation relation
  std::array<std::array<double, 2>, 2> m_mix{};    // same, from the interface transmission relation
  double det = 0.0;
  std::optional<std::array<double, 2>> nullvec;  // unit (A_i, B_i) when det vanishes
  double compatibility = 0.0;                    // scalar relation at nullvec
};

inline CornerSystem corner_system_det(const CornerParams& cp, double mu) {
  if (!(mu > 0.0)) fail(ErrorKind::config, "mu must be positive");
  const double k = cp.k;
  const double c2 = std::cos(2.0 * pi * mu), s2 = std::sin(2.0 * pi * mu);
  const double c = std::cos(cp.theta * mu), s = std::sin(cp.theta * mu);
  CornerSystem sys;
  sys.m_angle = {{{c2, s2}, {-k * s2, k * c2}}};
  sys.m_mix = {{{c * c + k * s * s, (1.0 - k) * c * s}, {(1.0 - k) * c * s, s * s + k * c * c}}};
  double n[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) n[i][j] = sys.m_angle[i][j] - sys.m_mix[i][j];
  sys.det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
  if (std::abs(sys.det) <= 1e-8) {
    // Null vector orthogonal to the larger row; any vector if both vanish.
    const double r0 = std::hypot(n[0][0], n[0][1]), r1 = std::hypot(n[1][0], n[1][1]);
    std::array<double, 2> v{1.0, 0.0};
    if (std::max(r0, r1) > 1e-12) {
      const int r = r0 >= r1 ? 0 : 1;
      const double len = std::max(r0, r1);
      v = {-n[r][1] / len, n[r][0] / len};
    }
    sys.compatibility = v[0] * (c2 - c * c - k * s * s) + v[1] * (s2 + (k - 1.0) * c * s);
    if (std::abs(sys.compatibility) > 1e-8) fail(ErrorKind::inconsistency, "null vector violates the compatibility relation");
    sys.nullvec = v;
  }
  return sys;
}

struct DecayFit {
  double mu_hat = 0.0;
  double L_hat = 0.0;
  double tau_min = 0.0, tau_max = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  return f;
}

}  // namespace detail

// Power-law fit |I(tau, h)| ~ L tau^{-mu}. A series recorded at another shift
// is moved to t = h first. Samples within 10x of the noise floor and the two
// smallest remaining tau are dropped.
inline DecayFit fit_decay_exponent(const IndicatorSeries& series, double h) {
  std::vector<double> taus, x, y;
  std::size_t dropped = 0;
  for (const auto& s : series.samples) {
    const double raw = std::abs(s.value);
    if (!std::isfinite(raw) || raw == 0.0 || !(raw >= 10.0 * s.noise_floor)) continue;
    if (dropped < 2) {
      ++dropped;
      continue;
    }
    taus.push_back(s.tau);
    x.push_back(std::log(s.tau));
    // log |I(tau, h)| = log |I(tau, t)| - tau (h - t)
    y.push_back(std::log(raw) - s.tau * (h - series.t));
  }
  if (x.size() < 8) fail(ErrorKind::window, "fewer than 8 usable samples for the decay fit");
  const auto lf = detail::least_squares(x, y);
  DecayFit fit;
  fit.mu_hat = -lf.slope;
  fit.L_hat = std::exp(lf.intercept);
  fit.tau_min = taus.front();
  fit.tau_max = taus.back();
  fit.r_squared = lf.r_squared;
  fit.samples = x.size();
  return fit;
}

}  // namespace enclosure
