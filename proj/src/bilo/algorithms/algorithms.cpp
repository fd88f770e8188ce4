#include "bilo/algorithms/algorithms.hpp"

#include <chrono>
#include <string>

#include "bilo/algorithms/schedules.hpp"
#include "bilo/core/rng.hpp"

namespace bilo {

namespace {

Vector resolve_init(const Vector& given, Eigen::Index dim, const char* name) {
  if (given.size() == 0) return Vector::Zero(dim);
  if (given.size() != dim) {
    throw InvalidArgument(std::string(name) + ": initialization has wrong dimension");
  }
  return given;
}

void check_common(const AlgoParams& p) {
  if (p.K < 1) throw InvalidArgument("K must be >= 1");
  if (p.alpha < 0.0) throw InvalidArgument("alpha must be non-negative");
  if (p.record_every < 1) throw InvalidArgument("record_every must be >= 1");
}

void check_batches(const AlgoParams& p) {
  if (p.S < 1 || p.D < 1 || p.D_g < 1 || p.D_f < 1) {
    throw InvalidArgument("batch sizes must be >= 1");
  }
}

class Recorder {
 public:
  Recorder(BilevelOracle& oracle, const MetricFn& metrics, int record_every)
      : oracle_(oracle),
        metrics_(metrics),
        record_every_(record_every),
        start_(std::chrono::steady_clock::now()) {}

  void maybe_record(RunTrace& trace, std::int64_t iter, const Vector& x, const Vector& y) {
    if (iter % record_every_ == 0) record(trace, iter, x, y);
  }

  void record(RunTrace& trace, std::int64_t iter, const Vector& x, const Vector& y) {
    TraceRow row;
    row.iter = iter;
    row.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    {
      BilevelOracle::CountingPause pause(oracle_);
      const auto [phi, grad_norm] = metrics_(x, y);
      row.phi = phi;
      row.grad_norm = grad_norm;
    }
    row.counters = oracle_.counters_snapshot();
    trace.rows.push_back(row);
  }

 private:
  BilevelOracle& oracle_;
  const MetricFn& metrics_;
  int record_every_;
  std::chrono::steady_clock::time_point start_;
};

void check_divergence(const Vector& x, const Vector& y, double limit, std::int64_t k) {
  if (!x.allFinite() || !y.allFinite() || x.norm() > limit || y.norm() > limit) {
    throw DivergenceError("iterates diverged (norm above " + std::to_string(limit) + ")", k);
  }
}

bool budget_spent(const BilevelOracle& oracle, const AlgoParams& p) {
  return p.budget > 0 && oracle.counters_snapshot().total() >= p.budget;
}

}  // namespace

RunTrace run_algorithm1(BilevelOracle& oracle, const AlgoParams& p, const MetricFn& metrics) {
  check_common(p);
  check_batches(p);
  if (p.T < 0) throw InvalidArgument("T must be >= 0");
  if (p.J < 1) throw InvalidArgument("J must be >= 1");

  RngStream rng(p.seed, 0);
  BatchSource batches(rng, oracle.num_upper_samples(), oracle.num_lower_samples(),
                      p.deterministic);
  Recorder recorder(oracle, metrics, p.record_every);

  RunTrace trace;
  Vector x = resolve_init(p.x0, oracle.dim_x(), "x0");
  Vector y = resolve_init(p.y0, oracle.dim_y(), "y0");
  Vector v = resolve_init(p.v0, oracle.dim_y(), "v0");
  const Vector y_cold = Vector::Zero(oracle.dim_y());

  const bool warm_y =
      p.warm_start_y.value_or(p.method == EstimatorMethod::SgdEstimation && p.warm_start_v);
  std::int64_t k = 0;
  for (; k < p.K; ++k) {
    recorder.maybe_record(trace, k, x, y);
    const Vector& y_start = warm_y ? y : y_cold;
    LlSgdResult ll = ll_sgd(oracle, x, y_start, p.T, p.beta, p.S, batches,
                            p.method == EstimatorMethod::StochasticBP);
    y = std::move(ll.y);

    Vector h;
    switch (p.method) {
      case EstimatorMethod::StochasticBP:
        h = estimate_bp(oracle, x, y, ll.tape, p.beta, p.D_f, batches);
        break;
      case EstimatorMethod::StochasticNS:
        h = estimate_ns(oracle, x, y, p.J, p.eta, p.D_f, p.D_g, p.D, batches);
        break;
      case EstimatorMethod::SgdEstimation:
        h = estimate_sgd(oracle, x, y, v, p.J, p.eta, p.D_f, p.D_g, p.D, batches,
                         p.warm_start_v);
        break;
    }
    x -= p.alpha * h;
    check_divergence(x, y, p.divergence_norm, k);
    if (budget_spent(oracle, p)) {
      trace.budget_exhausted = true;
      ++k;
      break;
    }
  }
  recorder.record(trace, k, x, y);
  trace.x = std::move(x);
  trace.y = std::move(y);
  trace.v = std::move(v);
  return trace;
}

RunTrace run_ssgd(BilevelOracle& oracle, const AlgoParams& p, const MetricFn& metrics) {
  check_common(p);
  check_batches(p);
  if (p.T < 1 || p.J < 1) throw InvalidArgument("ssgd: T and J must be >= 1");

  RngStream rng(p.seed, 0);
  BatchSource batches(rng, oracle.num_upper_samples(), oracle.num_lower_samples(),
                      p.deterministic);
  Recorder recorder(oracle, metrics, p.record_every);

  RunTrace trace;
  Vector x = resolve_init(p.x0, oracle.dim_x(), "x0");
  WarmState carried{resolve_init(p.y0, oracle.dim_y(), "y0"),
                    resolve_init(p.v0, oracle.dim_y(), "v0")};

  // The estimate consumed by the first x step comes from the initializations;
  // it is evaluation-only work, outside the counted budget.
  Vector h;
  {
    BilevelOracle::CountingPause pause(oracle);
    h = assemble_hypergradient(oracle, x, carried.y, carried.v, p.D_f, p.D_g, batches);
  }

  std::int64_t k = 0;
  for (; k < p.K; ++k) {
    recorder.maybe_record(trace, k, x, carried.y);
    x -= p.alpha * h;
    check_divergence(x, carried.y, p.divergence_norm, k);
    carried.y = ll_sgd(oracle, x, carried.y, p.T, p.beta, p.S, batches).y;
    h = estimate_sgd(oracle, x, carried.y, carried.v, p.J, p.eta, p.D_f, p.D_g, p.D, batches,
                     true);
    if (budget_spent(oracle, p)) {
      trace.budget_exhausted = true;
      ++k;
      break;
    }
  }
  recorder.record(trace, k, x, carried.y);
  trace.x = std::move(x);
  trace.y = std::move(carried.y);
  trace.v = std::move(carried.v);
  return trace;
}

RunTrace run_stocbio(BilevelOracle& oracle, const AlgoParams& p, const MetricFn& metrics) {
  check_common(p);
  check_batches(p);
  if (p.T < 1 || p.J < 1) throw InvalidArgument("stocbio: T and J must be >= 1");

  RngStream rng(p.seed, 0);
  BatchSource batches(rng, oracle.num_upper_samples(), oracle.num_lower_samples(),
                      p.deterministic);
  Recorder recorder(oracle, metrics, p.record_every);

  RunTrace trace;
  Vector x = resolve_init(p.x0, oracle.dim_x(), "x0");
  Vector y = resolve_init(p.y0, oracle.dim_y(), "y0");

  Vector h;
  {
    BilevelOracle::CountingPause pause(oracle);
    h = estimate_ns(oracle, x, y, p.J, p.eta, p.D_f, p.D_g, p.D, batches);
  }

  std::int64_t k = 0;
  for (; k < p.K; ++k) {
    recorder.maybe_record(trace, k, x, y);
    x -= p.alpha * h;
    check_divergence(x, y, p.divergence_norm, k);
    y = ll_sgd(oracle, x, y, p.T, p.beta, p.S, batches).y;
    h = estimate_ns(oracle, x, y, p.J, p.eta, p.D_f, p.D_g, p.D, batches);
    if (budget_spent(oracle, p)) {
      trace.budget_exhausted = true;
      ++k;
      break;
    }
  }
  recorder.record(trace, k, x, y);
  trace.x = std::move(x);
  trace.y = std::move(y);
  return trace;
}

RunTrace run_bsa(BilevelOracle& oracle, const AlgoParams& p, const MetricFn& metrics) {
  check_common(p);
  if (p.J < 1) throw InvalidArgument("bsa: J must be >= 1");
  if (p.d_alpha <= 0.0 || p.d_beta <= 0.0) {
    throw InvalidArgument("bsa: schedule constants must be positive");
  }

  RngStream rng(p.seed, 0);
  BatchSource batches(rng, oracle.num_upper_samples(), oracle.num_lower_samples(),
                      p.deterministic);
  Recorder recorder(oracle, metrics, p.record_every);

  RunTrace trace;
  Vector x = resolve_init(p.x0, oracle.dim_x(), "x0");
  Vector y = resolve_init(p.y0, oracle.dim_y(), "y0");

  std::int64_t k = 0;
  for (; k < p.K; ++k) {
    recorder.maybe_record(trace, k, x, y);
    const int steps = bsa_inner_steps(static_cast<int>(k));
    for (int t = 0; t < steps; ++t) {
      y -= bsa_beta(t, p.d_beta) * oracle.grad_y_g(x, y, batches.lower(1));
    }
    const Vector h = estimate_ns(oracle, x, y, p.J, p.eta, 1, 1, 1, batches);
    x -= bsa_alpha(static_cast<int>(k), p.d_alpha) * h;
    check_divergence(x, y, p.divergence_norm, k);
    if (budget_spent(oracle, p)) {
      trace.budget_exhausted = true;
      ++k;
      break;
    }
  }
  recorder.record(trace, k, x, y);
  trace.x = std::move(x);
  trace.y = std::move(y);
  return trace;
}

RunTrace run_ttsa(BilevelOracle& oracle, const AlgoParams& p, const MetricFn& metrics) {
  check_common(p);
  if (p.J < 1) throw InvalidArgument("ttsa: J must be >= 1");
  if (p.d_alpha <= 0.0 || p.d_beta <= 0.0) {
    throw InvalidArgument("ttsa: schedule constants must be positive");
  }

  RngStream rng(p.seed, 0);
  BatchSource batches(rng, oracle.num_upper_samples(), oracle.num_lower_samples(),
                      p.deterministic);
  Recorder recorder(oracle, metrics, p.record_every);

  RunTrace trace;
  Vector x = resolve_init(p.x0, oracle.dim_x(), "x0");
  Vector y = resolve_init(p.y0, oracle.dim_y(), "y0");

  std::int64_t k = 0;
  for (; k < p.K; ++k) {
    recorder.maybe_record(trace, k, x, y);
    y -= ttsa_beta(static_cast<int>(k), p.d_beta) * oracle.grad_y_g(x, y, batches.lower(1));
    const Vector h = estimate_ns(oracle, x, y, p.J, p.eta, 1, 1, 1, batches);
    x -= ttsa_alpha(static_cast<int>(k), p.d_alpha) * h;
    check_divergence(x, y, p.divergence_norm, k);
    if (budget_spent(oracle, p)) {
      trace.budget_exhausted = true;
      ++k;
      break;
    }
  }
  recorder.record(trace, k, x, y);
  trace.x = std::move(x);
  trace.y = std::move(y);
  return trace;
}

}  // namespace bilo
