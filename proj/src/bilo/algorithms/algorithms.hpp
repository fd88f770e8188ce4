#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bilo/core/oracle.hpp"
#include "bilo/estimators/estimators.hpp"

namespace bilo {

struct TraceRow {
  std::int64_t iter = 0;
  double elapsed_s = 0.0;
  double phi = 0.0;
  double grad_norm = 0.0;
  ComplexityCounters counters;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  Vector x, y, v;  // final iterates
  bool budget_exhausted = false;
};

// Evaluates (Phi(x), |grad Phi(x)|) for the trace; y_hint is the run's current
// lower-level iterate, which proxy evaluators may use as a starting point.
using MetricFn = std::function<std::pair<double, double>(const Vector& x, const Vector& y_hint)>;

struct AlgoParams {
  int K = 1000;
  int T = 5;
  int J = 3;
  double alpha = 1e-3;
  double beta = 0.1;
  double eta = 0.1;
  int S = 5, D = 5, D_g = 5, D_f = 5;
  double d_alpha = 0.1, d_beta = 0.1;  // BSA / TTSA scale constants

  // Generic-outer-loop settings: hypergradient estimation method, carried
  // linear-system iterate, carried lower-level iterate. The lower iterate is
  // reinitialized to zero each outer iteration unless the estimator carries a
  // warm v; warm_start_y overrides that rule when set.
  EstimatorMethod method = EstimatorMethod::SgdEstimation;
  bool warm_start_v = true;
  std::optional<bool> warm_start_y;

  Vector x0, y0, v0;  // empty -> zeros

  std::uint64_t seed = 1;
  int record_every = 1;
  bool deterministic = false;
  std::uint64_t budget = 0;  // total counter units; 0 = unlimited
  double divergence_norm = 1e12;
};

// Generic simple outer loop: T lower-level SGD steps, one hypergradient
// estimate by the configured method, one x step per iteration.
RunTrace run_algorithm1(BilevelOracle& oracle, const AlgoParams& params, const MetricFn& metrics);

// Warm-started double-loop with the SGD-based linear-system solve; the x step
// consumes the estimate assembled at the end of the previous iteration.
RunTrace run_ssgd(BilevelOracle& oracle, const AlgoParams& params, const MetricFn& metrics);

// Warm-started y, Neumann-series estimation rebuilt from scratch each
// iteration.
RunTrace run_stocbio(BilevelOracle& oracle, const AlgoParams& params, const MetricFn& metrics);

// Decaying-schedule double-loop baseline, batch size 1.
RunTrace run_bsa(BilevelOracle& oracle, const AlgoParams& params, const MetricFn& metrics);

// Two-timescale single-loop baseline, batch size 1.
RunTrace run_ttsa(BilevelOracle& oracle, const AlgoParams& params, const MetricFn& metrics);

}  // namespace bilo
