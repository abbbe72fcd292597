#pragma once

#include <cstdint>
#include <random>

namespace ecgraph {

/// Seeded generator whose draws are bit-identical across standard libraries.
///
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// distribution mappings below are implemented here because the standard
/// library distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [0, bound); bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ecgraph
