#pragma once

#include <cstdio>
#include <string>

namespace auq {

// Shortest round-trippable decimal form; used for every CSV number so output
// bytes are reproducible across runs and thread counts.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace auq
