#pragma once

#include <charconv>
#include <string>

#include "rydkerr/errors.hpp"

namespace rydkerr::detail {

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericError("failed to format number");
  return std::string(buf, end);
}

}  // namespace rydkerr::detail
