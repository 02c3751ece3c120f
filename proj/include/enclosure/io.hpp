#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "enclosure/corner_spectrum.hpp"
#include "enclosure/errors.hpp"
#include "enclosure/forward_solver.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/probe_indicator.hpp"
#include "enclosure/reconstruction.hpp"
#include "enclosure/scene.hpp"

namespace enclosure::io {

using json = nlohmann::json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::numeric, "sha256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

// Writes through a temporary file in the same directory and renames it.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::config, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(ErrorKind::config, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, what + ": " + e.what());
  }
}

// Fixed 17-significant-digit rendering for CSV columns.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- points and polygons ----

inline json to_json(Point2 p) { return json::array({p.x, p.y}); }

inline Point2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorKind::config, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json vertices_json(const Polygon& p) {
  json a = json::array();
  for (const auto& v : p.vertices()) a.push_back(to_json(v));
  return a;
}

inline std::vector<Point2> points_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorKind::config, what + " must be an array of points");
  std::vector<Point2> pts;
  for (const auto& e : j) pts.push_back(point_from_json(e));
  return pts;
}

template <class T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::config, what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::config, what + ": bad field '" + key + "'");
  }
}

// ---- scene ----

inline Polygon polygon_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) fail(ErrorKind::config, what + " must be an object");
  const std::string type = j.value("type", "polygon");
  if (type == "regular_polygon") {
    const int n = field<int>(j, "n", what);
    if (n < 3) fail(ErrorKind::structural, what + ": regular polygon needs n >= 3");
    const double r = field<double>(j, "circumradius", what);
    const Point2 c = j.contains("center") ? point_from_json(j["center"]) : Point2{};
    return regular_polygon(static_cast<std::size_t>(n), r, c, j.value("rotation", 0.0));
  }
  if (type != "polygon") fail(ErrorKind::config, what + ": unknown polygon type '" + type + "'");
  if (!j.contains("vertices")) fail(ErrorKind::config, what + ": missing field 'vertices'");
  return Polygon(points_from_json(j["vertices"], what));
}

inline Scene scene_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "scene must be a JSON object");
  if (!j.contains("omega") || !j.contains("inclusion")) fail(ErrorKind::config, "scene needs 'omega' and 'inclusion'");
  Scene s{polygon_from_json(j["omega"], "omega"), polygon_from_json(j["inclusion"], "inclusion"),
          field<double>(j, "k", "scene"), CurrentSpec::linear({1.0, 0.0})};
  if (j.contains("current")) {
    const auto& c = j["current"];
    const std::string type = field<std::string>(c, "type", "current");
    if (type == "linear") {
      s.current = CurrentSpec::linear(point_from_json(c.at("direction")));
    } else if (type == "mode") {
      s.current = CurrentSpec::mode(field<int>(c, "n", "current"));
    } else {
      fail(ErrorKind::config, "current: unknown type '" + type + "'");
    }
  }
  return s;
}

inline json to_json(const Scene& s) {
  json cur;
  if (s.current.type == CurrentSpec::Type::linear)
    cur = {{"type", "linear"}, {"direction", to_json(s.current.direction)}};
  else
    cur = {{"type", "mode"}, {"n", s.current.n}};
  return {{"omega", {{"type", "polygon"}, {"vertices", vertices_json(s.omega)}}},
          {"inclusion", {{"type", "polygon"}, {"vertices", vertices_json(s.inclusion)}}},
          {"k", s.k},
          {"current", cur}};
}

inline std::string scene_digest(const Scene& s) { return sha256_hex(to_json(s).dump()); }

inline Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(parse(read_file(path), path.string()));
}

// ---- Cauchy data ----

inline json to_json(const CauchyData& cd) {
  json nodes = json::array(), ge = json::array();
  for (const auto& p : cd.boundary_nodes) nodes.push_back(to_json(p));
  for (const auto& e : cd.g_edges) ge.push_back(json::array({e[0], e[1]}));
  return {{"boundary_nodes", nodes}, {"u", cd.u},          {"g", cd.g},
          {"g_edges", ge},           {"weights", cd.weights}, {"u_noise_sigma", cd.u_noise_sigma},
          {"scene_digest", cd.scene_digest}};
}

inline CauchyData cauchy_from_json(const json& j) {
  const std::string what = "cauchy data";
  CauchyData cd;
  cd.boundary_nodes = points_from_json(j.contains("boundary_nodes") ? j["boundary_nodes"] : json(), what);
  cd.u = field<std::vector<double>>(j, "u", what);
  cd.g = field<std::vector<double>>(j, "g", what);
  cd.weights = field<std::vector<double>>(j, "weights", what);
  cd.u_noise_sigma = j.value("u_noise_sigma", 0.0);
  cd.scene_digest = j.value("scene_digest", std::string());
  const std::size_t n = cd.boundary_nodes.size();
  if (j.contains("g_edges")) {
    for (const auto& e : j["g_edges"]) {
      if (!e.is_array() || e.size() != 2) fail(ErrorKind::config, what + ": g_edges entries must be pairs");
      cd.g_edges.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  } else {
    // Node values only: continuous, edge-linear current.
    for (std::size_t i = 0; i < cd.g.size(); ++i) cd.g_edges.push_back({cd.g[i], cd.g[(i + 1) % cd.g.size()]});
  }
  if (n < 3 || cd.u.size() != n || cd.g.size() != n || cd.weights.size() != n || cd.g_edges.size() != n)
    fail(ErrorKind::data, what + ": inconsistent array lengths");
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice_area += cross(cd.boundary_nodes[i], cd.boundary_nodes[(i + 1) % n]);
  if (!(twice_area > 0.0)) fail(ErrorKind::data, what + ": boundary loop must be counter-clockwise");
  return cd;
}

inline CauchyData load_cauchy(const std::filesystem::path& path) {
  return cauchy_from_json(parse(read_file(path), path.string()));
}

// ---- hull result ----

inline json to_json(const HullResult& r) {
  json hull = vertices_json(r.hull), est = json::array();
  for (const auto& e : r.estimates) {
    json item = {{"phi", e.direction.angle()},
                 {"h_hat", e.h_hat},
                 {"r2", e.r_squared},
                 {"window", json::array({e.tau_min, e.tau_max})},
                 {"samples", e.samples},
                 {"status", to_string(e.status)}};
    if (!e.reason.empty()) item["reason"] = e.reason;
    if (e.regular_margin) item["regular_margin"] = *e.regular_margin;
    est.push_back(item);
  }
  json out = {{"hull", hull}, {"estimates", est}};
  if (r.metrics) {
    json errs = json::array();
    for (const auto& v : r.metrics->support_errors) errs.push_back(v ? json(*v) : json(nullptr));
    out["metrics"] = {{"hausdorff", r.metrics->hausdorff}, {"support_errors", errs}};
  }
  return out;
}

// ---- CSV ----

inline std::string indicator_csv(const IndicatorSeries& s, const std::vector<bool>* trusted = nullptr) {
  std::ostringstream os;
  os << "phi_rad,tau,t,re,im,abs,log_abs" << (trusted ? ",trusted" : "") << '\n';
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    const auto& x = s.samples[i];
    const double a = std::abs(x.value);
    os << num(s.direction.angle()) << ',' << num(x.tau) << ',' << num(s.t) << ',' << num(x.value.real()) << ','
       << num(x.value.imag()) << ',' << num(a) << ',' << num(std::log(a));
    if (trusted) os << ',' << ((*trusted)[i] ? 1 : 0);
    os << '\n';
  }
  return os.str();
}

inline std::string spectrum_csv(const CornerParams& cp, const std::vector<double>& mus) {
  std::ostringstream os;
  os << "k,theta_rad,index,mu\n";
  for (std::size_t i = 0; i < mus.size(); ++i)
    os << num(cp.k) << ',' << num(cp.theta) << ',' << (i + 1) << ',' << num(mus[i]) << '\n';
  return os.str();
}

// Parses "lo:hi:N" (uniform) or "lo:hi:Nlog" (geometric).
inline std::vector<double> parse_tau_grid(const std::string& spec) {
  const auto a = spec.find(':'), b = spec.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) fail(ErrorKind::config, "tau grid must look like lo:hi:N[log]");
  try {
    const double lo = std::stod(spec.substr(0, a)), hi = std::stod(spec.substr(a + 1, b - a - 1));
    std::string n = spec.substr(b + 1);
    const bool geometric = n.size() > 3 && n.compare(n.size() - 3, 3, "log") == 0;
    if (geometric) n.resize(n.size() - 3);
    std::size_t used = 0;
    const int count = std::stoi(n, &used);
    if (used != n.size()) fail(ErrorKind::config, "tau grid count is not an integer");
    return geometric ? geometric_grid(lo, hi, count) : uniform_grid(lo, hi, count);
  } catch (const std::logic_error&) {
    fail(ErrorKind::config, "tau grid must look like lo:hi:N[log]");
  }
}

}  // namespace enclosure::io
