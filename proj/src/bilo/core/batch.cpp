#include "bilo/core/batch.hpp"

#include <numeric>

#include "bilo/core/types.hpp"

namespace bilo {

BatchSpec sample_batch(RngStream& rng, std::size_t dataset_size, std::size_t batch_size) {
  if (dataset_size == 0) {
    throw InvalidArgument("sample_batch: dataset_size must be positive");
  }
  if (batch_size == 0) {
    throw InvalidArgument("sample_batch: batch_size must be positive");
  }
  BatchSpec batch;
  batch.indices.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.indices[i] = static_cast<std::uint32_t>(rng.next_index(dataset_size));
  }
  return batch;
}

BatchSpec full_batch(std::size_t dataset_size) {
  if (dataset_size == 0) {
    throw InvalidArgument("full_batch: dataset_size must be positive");
  }
  BatchSpec batch;
  batch.indices.resize(dataset_size);
  std::iota(batch.indices.begin(), batch.indices.end(), 0u);
  return batch;
}

BatchSource::BatchSource(RngStream& rng, std::size_t upper_size, std::size_t lower_size,
                         bool deterministic)
    : rng_(rng), upper_size_(upper_size), lower_size_(lower_size), deterministic_(deterministic) {}

BatchSpec BatchSource::upper(std::size_t batch_size) {
  if (deterministic_) return full_batch(upper_size_);
  return sample_batch(rng_, upper_size_, batch_size);
}

BatchSpec BatchSource::lower(std::size_t batch_size) {
  if (deterministic_) return full_batch(lower_size_);
  return sample_batch(rng_, lower_size_, batch_size);
}

}  // namespace bilo
