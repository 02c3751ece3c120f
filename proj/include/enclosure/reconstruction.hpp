#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "enclosure/corner_spectrum.hpp"
#include "enclosure/errors.hpp"
#include "enclosure/forward_solver.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/probe_indicator.hpp"

namespace enclosure {

// Geometric grid of n points on [lo, hi].
inline std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) fail(ErrorKind::config, "geometric grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  g.back() = hi;
  return g;
}

inline std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (!(hi > lo) || n < 2) fail(ErrorKind::config, "uniform grid needs lo < hi and n >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

struct ReconstructionConfig {
  std::vector<double> taus = geometric_grid(4.0, 13.0, 24);
  double t = 0.0;
  // log(tau^p |I|) is fitted against tau; p = 0 is the bare linear fit.
  double prefactor_power = 1.0;
  double floor_factor = 10.0;   // usable samples satisfy |I| >= floor_factor * noise floor
  double jump_tolerance = 0.5;  // max deviation of a local log-rate from the running median
  std::size_t min_samples = 8;
  double min_r_squared = 0.99;
  double rate_threshold = 0.05;  // classify_side: |slope| below this is indeterminate
  double angle_offset = 0.0;     // first direction of the sweep
  int threads = 0;               // 0: ENCLOSURE_THREADS or hardware concurrency
};

enum class EstimateStatus { ok, indeterminate };

inline const char* to_string(EstimateStatus s) { return s == EstimateStatus::ok ? "ok" : "indeterminate"; }

struct SupportEstimate {
  Direction direction;
  double h_hat = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double tau_min = 0.0, tau_max = 0.0;
  std::size_t samples = 0;
  EstimateStatus status = EstimateStatus::indeterminate;
  std::string reason;
  std::optional<double> regular_margin;
};

namespace detail {

// Largest h over the measurement loop; no genuine support value can reach it.
inline double data_support(const CauchyData& cd, const Direction& d) {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& p : cd.boundary_nodes) h = std::max(h, dot(p, d.omega()));
  return h;
}

struct Window {
  std::size_t first = 0, last = 0;  // inclusive
  bool empty = true;
};

// Usable window: the leading run of samples above the noise floor, cut where
// the local growth rate of log|I| departs from its running median. Past that
// point the discretization error of the data takes over and grows at its own,
// much larger rate. Every rule is invariant under the shift t.
inline Window usable_window(const IndicatorSeries& s, const ReconstructionConfig& cfg) {
  Window w;
  const auto& x = s.samples;
  std::size_t i = 0;
  auto usable = [&](std::size_t j) {
    const double a = std::abs(x[j].value);
    return std::isfinite(a) && a > 0.0 && a >= cfg.floor_factor * x[j].noise_floor;
  };
  while (i < x.size() && !usable(i)) ++i;
  if (i == x.size()) return w;
  w.first = w.last = i;
  w.empty = false;
  std::vector<double> rates;
  for (std::size_t j = i + 1; j < x.size() && usable(j); ++j) {
    const double r = (std::log(std::abs(x[j].value)) - std::log(std::abs(x[j - 1].value))) / (x[j].tau - x[j - 1].tau);
    if (rates.size() >= 3) {
      std::vector<double> sorted = rates;
      std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
      if (std::abs(r - sorted[sorted.size() / 2]) > cfg.jump_tolerance) break;
    }
    rates.push_back(r);
    w.last = j;
  }
  return w;
}

}  // namespace detail

// Support estimate from an indicator series: h_hat = t + slope of the line fit
// of log(tau^p |I(tau, t)|) against tau over the usable window. Estimates at or
// beyond `data_support` are rejected.
inline SupportEstimate fit_support(const IndicatorSeries& series, double data_support,
                                   const ReconstructionConfig& cfg = {}) {
  if (series.samples.size() < cfg.min_samples) fail(ErrorKind::config, "tau grid needs at least 8 points");
  const auto w = detail::usable_window(series, cfg);
  if (w.empty) fail(ErrorKind::signal, "indicator below the noise floor at every tau");
  SupportEstimate est{series.direction};
  est.samples = w.last - w.first + 1;
  est.tau_min = series.samples[w.first].tau;
  est.tau_max = series.samples[w.last].tau;
  if (est.samples < 2) {
    est.reason = "window too short";
    return est;
  }
  std::vector<double> x, y;
  for (std::size_t i = w.first; i <= w.last; ++i) {
    const auto& s = series.samples[i];
    x.push_back(s.tau);
    y.push_back(std::log(std::abs(s.value)) + cfg.prefactor_power * std::log(s.tau));
  }
  const auto lf = detail::least_squares(x, y);
  est.slope = lf.slope;
  est.intercept = lf.intercept;
  est.r_squared = lf.r_squared;
  est.h_hat = series.t + lf.slope;
  if (est.samples < cfg.min_samples) {
    est.reason = "window too short";
  } else if (lf.r_squared < cfg.min_r_squared) {
    est.reason = "poor linear fit";
  } else if (est.h_hat >= data_support) {
    est.reason = "growth rate beyond the measurement boundary";
  } else {
    est.status = EstimateStatus::ok;
  }
  return est;
}

// Support estimate from Cauchy data alone.
inline SupportEstimate estimate_support(const CauchyData& cd, const Direction& d, std::span<const double> taus,
                                        double t, const ReconstructionConfig& cfg = {}) {
  if (taus.size() < cfg.min_samples) fail(ErrorKind::config, "tau grid needs at least 8 points");
  return fit_support(indicator_series(cd, d, t, taus), detail::data_support(cd, d), cfg);
}

enum class Side { decays, grows, indeterminate };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::decays: return "decays";
    case Side::grows: return "grows";
    case Side::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

// Sign of the exponential rate of |I(tau, t)| over the usable window. At
// t = h_D the decay is polynomial, tau^{-mu}, which in the ideal limit is a
// decay; on a finite window it shows up as a small negative slope.
inline Side classify_side(const CauchyData& cd, const Direction& d, double t, std::span<const double> taus,
                          const ReconstructionConfig& cfg = {}) {
  check_tau_grid(taus);
  const auto series = indicator_series(cd, d, t, taus);
  const auto w = detail::usable_window(series, cfg);
  if (w.empty || w.last - w.first + 1 < cfg.min_samples) return Side::indeterminate;
  std::vector<double> x, y;
  for (std::size_t i = w.first; i <= w.last; ++i) {
    x.push_back(series.samples[i].tau);
    y.push_back(std::log(std::abs(series.samples[i].value)));
  }
  const double slope = detail::least_squares(x, y).slope;
  if (slope < -cfg.rate_threshold) return Side::decays;
  if (slope > cfg.rate_threshold) return Side::grows;
  return Side::indeterminate;
}

struct HullMetrics {
  double hausdorff = 0.0;
  std::vector<std::optional<double>> support_errors;  // per estimate; empty when indeterminate
};

struct HullResult {
  Polygon hull;
  std::vector<SupportEstimate> estimates;
  std::optional<HullMetrics> metrics;
};

inline int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ENCLOSURE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, n) on up to `threads` workers; each index writes its
// own slot, so results do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline HullResult reconstruct_hull(const CauchyData& cd, int n_directions, const ReconstructionConfig& cfg = {},
                                   const Polygon* truth = nullptr) {
  if (n_directions < 8) fail(ErrorKind::config, "need at least 8 directions");
  check_tau_grid(cfg.taus);
  std::vector<SupportEstimate> est(n_directions, SupportEstimate{Direction(0.0)});
  parallel_for(n_directions, thread_count(cfg.threads), [&](std::size_t j) {
    const Direction d(cfg.angle_offset + 2.0 * pi * static_cast<double>(j) / n_directions);
    try {
      est[j] = estimate_support(cd, d, cfg.taus, cfg.t, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::signal) throw;
      est[j] = SupportEstimate{d};
      est[j].reason = e.what();
    }
    if (truth) est[j].regular_margin = regularity_margin(*truth, d);
  });
  std::vector<SupportSample> samples;
  for (const auto& e : est)
    if (e.status == EstimateStatus::ok) samples.push_back({e.direction, e.h_hat});
  if (samples.size() < 3) fail(ErrorKind::coverage, "fewer than 3 usable directions");
  HullResult res{hull_from_support(samples), std::move(est), std::nullopt};
  if (truth) {
    HullMetrics m;
    m.hausdorff = hausdorff_distance(res.hull, *truth);
    for (const auto& e : res.estimates) {
      if (e.status == EstimateStatus::ok)
        m.support_errors.push_back(e.h_hat - support_function(*truth, e.direction));
      else
        m.support_errors.push_back(std::nullopt);
    }
    res.metrics = std::move(m);
  }
  return res;
}

// Gaussian noise on u with standard deviation rel_level * max |u|; g is left
// exact. The recorded noise level accumulates in quadrature.
inline CauchyData add_noise(const CauchyData& cd, double rel_level, std::uint64_t seed) {
  if (!(rel_level >= 0.0)) fail(ErrorKind::config, "noise level must be non-negative");
  CauchyData out = cd;
  if (rel_level == 0.0) return out;
  double umax = 0.0;
  for (double v : cd.u) umax = std::max(umax, std::abs(v));
  const double sigma = rel_level * umax;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& v : out.u) v += normal(rng);
  out.u_noise_sigma = std::hypot(cd.u_noise_sigma, sigma);
  return out;
}

}  // namespace enclosure
