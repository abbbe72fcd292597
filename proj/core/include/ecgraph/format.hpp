#pragma once

#include <array>
#include <charconv>
#include <string>

namespace ecgraph {

// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

}  // namespace ecgraph
