#pragma once

#include <cstdint>
#include <random>

namespace bilo {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); index and normal draws are generated here rather than with
// std::*_distribution so that identical (seed, stream) pairs reproduce the
// same sequence on every toolchain.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform index in [0, n) via 128-bit multiply-shift.
  std::size_t next_index(std::size_t n);

  // Uniform double in [0, 1).
  double next_unit();

  // Standard normal via the polar Box-Muller transform.
  double next_normal();
  double next_normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace bilo
