// Command-line harness: forward runs, indicator series, reconstruction,
// corner spectra and the validation suite.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enclosure/corner_spectrum.hpp"
#include "enclosure/forward_solver.hpp"
#include "enclosure/io.hpp"
#include "enclosure/probe_indicator.hpp"
#include "enclosure/reconstruction.hpp"
#include "enclosure/scene.hpp"
#include "enclosure/validation.hpp"

#ifndef ENCLOSURE_VERSION
#define ENCLOSURE_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace enclosure;
using io::json;

namespace {

enum Exit { ok = 0, config = 1, geometry = 2, numeric = 3, coverage = 4, failed_checks = 5 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::structural:
    case ErrorKind::geometry:
    case ErrorKind::regularity:
    case ErrorKind::mesh:
      return geometry;
    case ErrorKind::numeric:
    case ErrorKind::inconsistency:
      return numeric;
    case ErrorKind::coverage:
      return coverage;
    default:
      return config;
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct ForwardArgs {
  std::string scene, out;
  double h = 0.08;
  int grading = 4;
  bool allow_unrestricted = false;
  double noise = 0.0;
  std::uint64_t seed = 42;
};

int cmd_forward(const ForwardArgs& a) {
  const Scene scene = io::load_scene(a.scene);
  const auto check = check_scene(scene);
  if (!check.restriction_holds && !a.allow_unrestricted) {
    std::cerr << "error: diam D = " << check.inclusion_diameter << " is not below dist(D, boundary) = "
              << check.boundary_distance << "; reconstruction is not guaranteed (pass --allow-unrestricted)\n";
    return config;
  }
  json cfg = {{"scene", io::to_json(scene)}, {"h", a.h}, {"grading", a.grading}, {"noise", a.noise}, {"seed", a.seed}};
  const auto t0 = Clock::now();
  auto sim = simulate(scene, a.h, a.grading);
  const double t_solve = seconds_since(t0);
  CauchyData cd = add_noise(sim.data, a.noise, a.seed);
  cd.scene_digest = io::scene_digest(scene);
  const fs::path dir(a.out);
  io::write_atomic(dir / "cauchy.json", io::to_json(cd).dump(1) + "\n");
  json record = {{"config_digest", io::sha256_hex(cfg.dump())},
                 {"tool_version", ENCLOSURE_VERSION},
                 {"timings", {{"mesh_and_solve_s", t_solve}}},
                 {"mesh", {{"nodes", sim.mesh->nodes.size()}, {"triangles", sim.mesh->triangles.size()}}},
                 {"solver", {{"iterations", sim.solution.iterations}, {"relative_residual", sim.solution.relative_residual}}},
                 {"restriction_holds", check.restriction_holds},
                 {"files", json::array({"cauchy.json"})}};
  io::write_atomic(dir / "run.json", record.dump(1) + "\n");
  std::cout << "nodes " << sim.mesh->nodes.size() << ", boundary nodes " << cd.size() << ", current total "
            << cd.current_total() << "\n";
  return ok;
}

struct IndicatorArgs {
  std::string cauchy, out, tau = "4:13:24log", truth;
  double phi_deg = 45.0, t = 0.0;
};

int cmd_indicator(const IndicatorArgs& a) {
  const CauchyData cd = io::load_cauchy(a.cauchy);
  const Direction d(a.phi_deg * pi / 180.0);
  const auto taus = io::parse_tau_grid(a.tau);
  const auto series = indicator_series(cd, d, a.t, taus);
  // Trusted: above ten times the noise floor and, when the true inclusion is
  // known, inside the double-precision cancellation cap.
  double cap = std::numeric_limits<double>::infinity();
  if (!a.truth.empty()) {
    const Scene s = io::load_scene(a.truth);
    cap = cancellation_cap(support_function(s.omega, d), support_function(s.inclusion, d));
  }
  std::vector<bool> trusted;
  for (const auto& s : series.samples) trusted.push_back(s.tau <= cap && std::abs(s.value) >= 10.0 * s.noise_floor);
  const std::string csv = io::indicator_csv(series, &trusted);
  if (a.out.empty())
    std::cout << csv;
  else
    io::write_atomic(a.out, csv);
  return ok;
}

struct ReconstructArgs {
  std::string cauchy, truth, out, tau = "4:13:24log";
  int directions = 16;
  double t = 0.0, offset_deg = 0.0, noise = 0.0, prefactor = 1.0;
  std::uint64_t seed = 42;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  CauchyData cd = add_noise(io::load_cauchy(a.cauchy), a.noise, a.seed);
  ReconstructionConfig cfg;
  cfg.taus = io::parse_tau_grid(a.tau);
  cfg.t = a.t;
  cfg.angle_offset = a.offset_deg * pi / 180.0;
  cfg.prefactor_power = a.prefactor;
  std::optional<Scene> truth;
  if (!a.truth.empty()) truth = io::load_scene(a.truth);
  const auto res = reconstruct_hull(cd, a.directions, cfg, truth ? &truth->inclusion : nullptr);
  const std::string doc = io::to_json(res).dump(1) + "\n";
  if (a.out.empty())
    std::cout << doc;
  else
    io::write_atomic(a.out, doc);
  if (res.metrics) std::cerr << "hausdorff " << res.metrics->hausdorff << "\n";
  return ok;
}

struct SpectrumArgs {
  double k = 2.0, theta_deg = 270.0, mu_max = 5.0;
  std::string out, det_out;
};

int cmd_spectrum(const SpectrumArgs& a) {
  const CornerParams cp(a.k, a.theta_deg * pi / 180.0);
  const auto mus = corner_exponents(cp, a.mu_max);
  const std::string csv = io::spectrum_csv(cp, mus);
  if (a.out.empty())
    std::cout << csv;
  else
    io::write_atomic(a.out, csv);
  if (!a.det_out.empty()) {
    std::string trace = "mu,det\n";
    for (int i = 1; i <= static_cast<int>(a.mu_max * 200); ++i) {
      const double mu = i / 200.0;
      trace += io::num(mu) + "," + io::num(corner_system_det(cp, mu).det) + "\n";
    }
    io::write_atomic(a.det_out, trace);
  }
  return ok;
}

struct ValidateArgs {
  std::string scene;
  double h = 0.08;
  int grading = 4;
  bool skip_disc = false;
};

int cmd_validate(const ValidateArgs& a) {
  const Scene scene = a.scene.empty() ? default_scene() : io::load_scene(a.scene);
  check_scene(scene);
  ValidationOptions opt;
  opt.h_target = a.h;
  opt.grading_depth = a.grading;
  opt.disc_convergence = !a.skip_disc;
  const auto t0 = Clock::now();
  bool all = true;
  for (const auto& c : run_validation(scene, opt)) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all = all && c.pass;
  }
  std::cout << "elapsed " << seconds_since(t0) << " s\n";
  return all ? ok : failed_checks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enclosure-method reconstruction of polygonal inclusions"};
  app.require_subcommand(1);
  // --h is the mesh size, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");

  ForwardArgs fa;
  auto* fwd = app.add_subcommand("forward", "Mesh, solve and write Cauchy data");
  fwd->add_option("--scene", fa.scene, "Scene JSON")->required();
  fwd->add_option("--h", fa.h, "Target element diameter");
  fwd->add_option("--grading", fa.grading, "Corner grading depth");
  fwd->add_option("--out", fa.out, "Output directory")->required();
  fwd->add_flag("--allow-unrestricted", fa.allow_unrestricted, "Accept diam D >= dist(D, boundary)");
  fwd->add_option("--noise", fa.noise, "Relative noise level on u");
  fwd->add_option("--seed", fa.seed, "Noise seed");

  IndicatorArgs ia;
  auto* ind = app.add_subcommand("indicator", "Indicator series from Cauchy data");
  ind->add_option("--cauchy", ia.cauchy, "Cauchy data JSON")->required();
  ind->add_option("--phi-deg", ia.phi_deg, "Direction angle in degrees");
  ind->add_option("--t", ia.t, "Shift t");
  ind->add_option("--tau", ia.tau, "Grid lo:hi:N or lo:hi:Nlog");
  ind->add_option("--truth", ia.truth, "Scene JSON for the cancellation cap");
  ind->add_option("--out", ia.out, "Output CSV (stdout if absent)");

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Convex hull from Cauchy data");
  rec->add_option("--cauchy", ra.cauchy, "Cauchy data JSON")->required();
  rec->add_option("--directions", ra.directions, "Number of uniform directions");
  rec->add_option("--truth", ra.truth, "Scene JSON with the true inclusion");
  rec->add_option("--tau", ra.tau, "Grid lo:hi:N or lo:hi:Nlog");
  rec->add_option("--t", ra.t, "Shift t");
  rec->add_option("--offset-deg", ra.offset_deg, "Angle of the first direction");
  rec->add_option("--prefactor", ra.prefactor, "Power p in the fit of log(tau^p |I|)");
  rec->add_option("--noise", ra.noise, "Relative noise added before reconstruction");
  rec->add_option("--seed", ra.seed, "Noise seed");
  rec->add_option("--out", ra.out, "Output JSON (stdout if absent)");

  SpectrumArgs sa;
  auto* spec = app.add_subcommand("spectrum", "Corner exponents");
  spec->add_option("--k", sa.k, "Conductivity contrast");
  spec->add_option("--theta-deg", sa.theta_deg, "Outside angle in degrees");
  spec->add_option("--mu-max", sa.mu_max, "Largest exponent");
  spec->add_option("--out", sa.out, "Output CSV (stdout if absent)");
  spec->add_option("--det-out", sa.det_out, "Determinant trace CSV");

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "Run the property suite");
  val->add_option("--scene", va.scene, "Scene JSON (default scene if absent)");
  val->add_option("--h", va.h, "Target element diameter");
  val->add_option("--grading", va.grading, "Corner grading depth");
  val->add_flag("--skip-disc", va.skip_disc, "Skip the disc refinement study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : config;
  }

  try {
    if (*fwd) return cmd_forward(fa);
    if (*ind) return cmd_indicator(ia);
    if (*rec) return cmd_reconstruct(ra);
    if (*spec) return cmd_spectrum(sa);
    if (*val) return cmd_validate(va);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config;
  }
  return ok;
}
