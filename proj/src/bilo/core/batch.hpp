#pragma once

#include <cstdint>
#include <vector>

#include "bilo/core/rng.hpp"

namespace bilo {

// A sampled set of indices into a finite data distribution. Indices may
// repeat: sampling is i.i.d. uniform with replacement.
struct BatchSpec {
  std::vector<std::uint32_t> indices;

  std::size_t size() const { return indices.size(); }
};

BatchSpec sample_batch(RngStream& rng, std::size_t dataset_size, std::size_t batch_size);

// Enumerates every index exactly once (deterministic full-batch evaluation).
BatchSpec full_batch(std::size_t dataset_size);

// Draws the batches of one run. In deterministic mode every request returns
// the full dataset, which makes all algorithms exactly deterministic.
class BatchSource {
 public:
  BatchSource(RngStream& rng, std::size_t upper_size, std::size_t lower_size,
              bool deterministic = false);

  // Batch over the upper-level sample distribution (D_F and friends).
  BatchSpec upper(std::size_t batch_size);
  // Batch over the lower-level sample distribution (S_t, B_j, D_G).
  BatchSpec lower(std::size_t batch_size);

  bool deterministic() const { return deterministic_; }

 private:
  RngStream& rng_;
  std::size_t upper_size_;
  std::size_t lower_size_;
  bool deterministic_;
};

}  // namespace bilo
