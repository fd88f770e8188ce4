#pragma once

#include <cstdint>

namespace bilo {

// Per-sample work counters. A call over a batch of B samples adds B to the
// matching counter: gc_f for partial derivatives of F, gc_g for partial
// derivatives of G, jv_g / hv_g for Jacobian- and Hessian-vector products
// of G.
struct ComplexityCounters {
  std::uint64_t gc_f = 0;
  std::uint64_t gc_g = 0;
  std::uint64_t jv_g = 0;
  std::uint64_t hv_g = 0;

  std::uint64_t total() const { return gc_f + gc_g + jv_g + hv_g; }

  friend bool operator==(const ComplexityCounters&, const ComplexityCounters&) = default;
};

}  // namespace bilo
