#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bilo/core/types.hpp"
#include "bilo/estimators/estimators.hpp"

namespace bilo {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ProblemKind { Synthetic, Hyperclean, File };
enum class AlgorithmKind { Ssgd, StocBiO, Bsa, Ttsa, Alg1 };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Synthetic;
  // synthetic; dim > w0 length pads w0 with its last entry
  std::vector<double> w0 = {2.0, 5.0, 7.0};
  std::uint64_t dim = 0;
  std::uint64_t n_train = 10000;
  std::uint64_t n_val = 10000;
  double r = 0.5;
  double feature_std = 0.1;
  double noise_std = 1.0;
  double feature_scale = 1.0;
  // hyperclean
  std::uint64_t n_test = 0;  // 0 -> n_val
  std::uint64_t d = 5;
  std::uint64_t classes = 3;
  double corruption = 0.3;
  double ridge = 1e-3;
  double centroid_std = 2.0;
  double cluster_std = 1.0;
  // shared
  std::uint64_t data_seed = 1;
  std::string path;            // kind = file
  double profile_radius = 1.0;  // constants report

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct AlgorithmSpec {
  AlgorithmKind algorithm = AlgorithmKind::Ssgd;
  EstimatorMethod estimator = EstimatorMethod::SgdEstimation;  // alg1 only
  bool warm_start_v = true;
  // unset = warm-start y exactly when the estimator carries a warm v
  std::optional<bool> warm_start_y;
  int K = 1000;
  int T = 5;
  int J = 3;
  double alpha = 1e-3;
  double beta = 0.1;
  double eta = 0.1;
  int batch = 5;
  int S = -1, D = -1, D_g = -1, D_f = -1;  // resolved to batch at parse time
  double d_alpha = 0.1;
  double d_beta = 0.1;
  std::uint64_t budget = 0;

  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

struct RunSpec {
  std::vector<std::uint64_t> seeds = {1};
  std::string out = "runs";
  int record_every = 1;
  bool deterministic = false;

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  AlgorithmSpec algorithm;
  RunSpec run;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parses a sectioned key = value document. Unknown sections or keys, type
// mismatches, and constraint violations raise ConfigError naming the line and
// key. Overrides are "section.key" / value pairs applied after the document.
ExperimentConfig parse_config(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

std::string serialize_config(const ExperimentConfig& config);

const char* algorithm_name(AlgorithmKind kind);

}  // namespace bilo
