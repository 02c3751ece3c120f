#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "enclosure/corner_spectrum.hpp"
#include "enclosure/forward_solver.hpp"
#include "enclosure/probe_indicator.hpp"
#include "enclosure/reconstruction.hpp"
#include "enclosure/scene.hpp"

namespace enclosure {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationOptions {
  double h_target = 0.08;
  int grading_depth = 4;
  double phi = pi / 4.0;
  bool disc_convergence = true;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace detail

// Property suite behind the `validate` command.
inline std::vector<CheckResult> run_validation(const Scene& scene, const ValidationOptions& opt = {}) {
  std::vector<CheckResult> out;
  const Direction d(opt.phi);
  const auto sim = simulate(scene, opt.h_target, opt.grading_depth);
  const auto& cd = sim.data;

  if (scene.k != 1.0) {
    // Boundary pairing against the inclusion-side form.
    const double threshold = opt.h_target >= 0.2 ? 0.15 : 0.05;
    double worst = 0.0;
    for (double tau = 2.0; tau <= 8.0 + 1e-12; tau += 0.5) {
      const ProbeParams pp{d, tau, 0.0};
      const auto b = indicator_boundary(cd, pp).value;
      const auto o = indicator_inclusion_oracle(sim.solution, scene.inclusion, scene.k, pp, 0.0).value;
      worst = std::max(worst, std::abs(b - o) / std::abs(o));
    }
    out.push_back({"oracle equivalence, tau in [2,8]", worst <= threshold,
                   detail::fmt("max rel diff %.3e (threshold %.2f)", worst, threshold)});

    double lam = 0.0;
    for (double tau : {2.0, 5.0, 8.0}) {
      const ProbeParams pp{d, tau, 0.0};
      const auto a = indicator_inclusion_oracle(sim.solution, scene.inclusion, scene.k, pp, 0.0).value;
      const auto c = indicator_inclusion_oracle(sim.solution, scene.inclusion, scene.k, pp, 1.7).value;
      lam = std::max(lam, std::abs(a - c) / std::abs(a));
    }
    out.push_back({"lambda independence", lam <= 1e-6, detail::fmt("max rel change %.3e", lam)});
  }

  {
    double worst = 0.0;
    for (double tau : {3.0, 7.0, 11.0}) {
      const auto a = indicator_boundary(cd, {d, tau, 0.0}).value;
      const auto b = indicator_boundary(cd, {d, tau, 0.45}).value;
      worst = std::max(worst, std::abs(a * std::exp(-tau * 0.45) - b) / std::abs(b));
    }
    out.push_back({"exact shift identity", worst <= 1e-12, detail::fmt("max rel diff %.3e", worst)});
  }

  {
    const Scene plain{scene.omega, scene.inclusion, 1.0, scene.current};
    const auto sim1 = simulate(plain, opt.h_target, opt.grading_depth);
    bool below = true;
    double ratio = 0.0;
    for (double tau : {2.0, 4.0, 6.0}) {
      const auto v = indicator_boundary(sim1.data, {d, tau, 0.0});
      const double mag = std::abs(v.value);
      ratio = std::max(ratio, mag / v.noise_floor);
      below = below && mag <= 10.0 * v.noise_floor;
    }
    out.push_back({"k=1 indicator at noise floor", below, detail::fmt("max |I|/floor %.3g", ratio)});
  }

  if (opt.disc_convergence) {
    const auto ex = analytic_disc(3.0, 1.0, 2.0, 1);
    std::vector<double> errs;
    for (double h : {0.16, 0.08, 0.04}) {
      const Scene disc{regular_polygon(64, 3.0), regular_polygon(64, 1.0), 2.0, CurrentSpec::mode(1)};
      const auto s = simulate(disc, h, 0);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < s.data.size(); ++i) {
        const Point2 p = s.data.boundary_nodes[i];
        const double e = ex.trace_amplitude() * std::cos(std::atan2(p.y, p.x));
        num += s.data.weights[i] * (s.data.u[i] - e) * (s.data.u[i] - e);
        den += s.data.weights[i] * e * e;
      }
      errs.push_back(std::sqrt(num / den));
    }
    const bool ok = errs[1] <= 0.01 && errs[1] < errs[0] && errs[2] < errs[1];
    out.push_back({"disc oracle convergence", ok, detail::fmt("rel L2 %.3e at h=0.08, %.3e at h=0.04", errs[1], errs[2])});
  }

  {
    double worst = 0.0;
    for (double mu : {0.5, 1.0, 1.5}) {
      const auto li = laplace_corner_integral(mu, -pi / 4.0, 0.5, 200.0);
      worst = std::max(worst, std::abs(li.numeric - li.leading) / std::abs(li.leading));
    }
    out.push_back({"Laplace asymptotics at tau=200", worst <= 1e-6, detail::fmt("max rel err %.3e", worst)});
  }

  {
    const auto a = corner_exponents({2.0, 1.5 * pi}, 5.0), b = corner_exponents({0.5, 1.5 * pi}, 5.0);
    double diff = a.size() == b.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    const double closed = 2.0 / pi * std::acos(1.0 / 6.0);
    const bool ok = diff <= 1e-10 && !a.empty() && std::abs(a[0] - closed) <= 1e-10;
    out.push_back({"corner exponent invariances", ok, detail::fmt("k<->1/k diff %.3e, mu1 %.12f", diff, a.empty() ? 0.0 : a[0])});
  }
  return out;
}

}  // namespace enclosure
