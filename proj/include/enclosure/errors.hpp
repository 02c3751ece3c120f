#pragma once

#include <stdexcept>
#include <string>

namespace enclosure {

// Error categories. The CLI maps each category onto a process exit code.
enum class ErrorKind {
  config,      // bad configuration or input document
  structural,  // malformed polygon or other structural violation
  geometry,    // degenerate geometry (inclusion touching the domain, ...)
  regularity,  // direction is not regular with respect to the polygon
  data,        // incompatible or empty measurement data
  numeric,     // solver failure, overflow
  range,       // probe overflow guard tripped
  window,      // too few usable samples for a fit
  signal,      // indicator drowned in noise
  mesh,        // interface not resolved by the mesh
  coverage,    // too few directions to bound a hull
  inconsistency
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::structural: return "structural";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::regularity: return "regularity";
    case ErrorKind::data: return "data";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::range: return "range";
    case ErrorKind::window: return "window";
    case ErrorKind::signal: return "signal";
    case ErrorKind::mesh: return "mesh";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::inconsistency: return "inconsistency";
  }
  return "unknown";
}

}  // namespace enclosure
