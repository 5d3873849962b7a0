#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace scramble {

/// Shortest round-trippable text for a double; stable across runs.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace scramble
