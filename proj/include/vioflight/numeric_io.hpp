#ifndef VIOFLIGHT_NUMERIC_IO_HPP
#define VIOFLIGHT_NUMERIC_IO_HPP

#include <cstdio>
#include <string>

namespace vioflight {

/// Decimal form used in every text output. 17 significant digits
/// round-trip IEEE doubles bit-exactly.
inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace vioflight

#endif  // VIOFLIGHT_NUMERIC_IO_HPP
