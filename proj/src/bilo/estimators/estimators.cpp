#include "bilo/estimators/estimators.hpp"

#include <cassert>
#include <cmath>

namespace bilo {

namespace {

void check_loop_and_step(int steps, double step_size, const char* who) {
  if (steps < 1) throw InvalidArgument(std::string(who) + ": loop bound must be >= 1");
  if (step_size <= 0.0) throw InvalidArgument(std::string(who) + ": step size must be positive");
}

void check_batches(int d_f, int d_g, int d, const char* who) {
  if (d_f < 1 || d_g < 1 || d < 1) {
    throw InvalidArgument(std::string(who) + ": batch sizes must be >= 1");
  }
}

void guard_check(const std::optional<VNormGuard>& guard, const Vector& v) {
  (void)guard;
  (void)v;
#ifndef NDEBUG
  if (guard) {
    assert(v.norm() <= guard->limit * (1.0 + 1e-12) && "linear-system iterate left its norm bound");
  }
#endif
}

}  // namespace

const char* estimator_name(EstimatorMethod method) {
  switch (method) {
    case EstimatorMethod::StochasticBP: return "bp";
    case EstimatorMethod::StochasticNS: return "ns";
    case EstimatorMethod::SgdEstimation: return "sgd";
  }
  return "?";
}

LlSgdResult ll_sgd(BilevelOracle& oracle, const Vector& x, const Vector& y0, int steps,
                   double beta, int batch_size, BatchSource& batches, bool record_tape) {
  if (steps < 0) throw InvalidArgument("ll_sgd: negative step count");
  if (beta <= 0.0) throw InvalidArgument("ll_sgd: step size must be positive");
  if (batch_size < 1) throw InvalidArgument("ll_sgd: batch size must be >= 1");

  LlSgdResult result;
  result.y = y0;
  if (record_tape) result.tape.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    BatchSpec batch = batches.lower(static_cast<std::size_t>(batch_size));
    if (record_tape) result.tape.push_back({batch, result.y});
    result.y -= beta * oracle.grad_y_g(x, result.y, batch);
    if (!result.y.allFinite()) {
      throw NumericalError("ll_sgd diverged at inner step " + std::to_string(t) +
                           " with step size " + std::to_string(beta));
    }
  }
  return result;
}

Vector estimate_bp(BilevelOracle& oracle, const Vector& x, const Vector& y_t, const BpTape& tape,
                   double beta, int d_f, BatchSource& batches) {
  if (beta <= 0.0) throw InvalidArgument("estimate_bp: step size must be positive");
  if (d_f < 1) throw InvalidArgument("estimate_bp: batch size must be >= 1");
  for (const auto& step : tape) {
    if (step.y.size() != y_t.size()) {
      throw InvalidState("estimate_bp: tape/oracle dimension mismatch");
    }
  }

  const BatchSpec d_f_batch = batches.upper(static_cast<std::size_t>(d_f));
  Vector h = oracle.grad_x_f(x, y_t, d_f_batch);
  if (tape.empty()) return h;

  // Transposed-Jacobian product, right to left: w starts at grad_y F and picks
  // up one (I - beta H_t) factor per step while the per-step Jacobian terms
  // accumulate.
  Vector w = oracle.grad_y_f(x, y_t, d_f_batch);
  Vector accum = Vector::Zero(h.size());
  for (std::size_t t = tape.size(); t-- > 0;) {
    const BpTapeStep& step = tape[t];
    accum.noalias() += oracle.jvp_xy_g(x, step.y, step.batch, w);
    if (t > 0) {
      w -= beta * oracle.hvp_yy_g(x, step.y, step.batch, w);
    }
  }
  h.noalias() -= beta * accum;
  return h;
}

Vector estimate_ns(BilevelOracle& oracle, const Vector& x, const Vector& y_t, int j_steps,
                   double eta, int d_f, int d_g, int d, BatchSource& batches,
                   const std::optional<VNormGuard>& guard) {
  check_loop_and_step(j_steps, eta, "estimate_ns");
  check_batches(d_f, d_g, d, "estimate_ns");

  // One draw of D_F, two uses: both partial derivatives of F come from it.
  const BatchSpec d_f_batch = batches.upper(static_cast<std::size_t>(d_f));
  const Vector grad_x = oracle.grad_x_f(x, y_t, d_f_batch);
  const Vector v0 = oracle.grad_y_f(x, y_t, d_f_batch);

  std::vector<BatchSpec> hess_batches;
  hess_batches.reserve(static_cast<std::size_t>(j_steps - 1));
  for (int i = 1; i < j_steps; ++i) {
    hess_batches.push_back(batches.lower(static_cast<std::size_t>(d)));
  }

  // Horner form of the truncated series: v = v0 + (I - eta H_i) v, innermost
  // factor first; equals the sum of ordered products term by term.
  Vector v = v0;
  for (std::size_t i = hess_batches.size(); i-- > 0;) {
    v -= eta * oracle.hvp_yy_g(x, y_t, hess_batches[i], v);
    v += v0;
  }
  v *= eta;
  ensure_finite(v, "estimate_ns");
  guard_check(guard, v);

  const BatchSpec d_g_batch = batches.lower(static_cast<std::size_t>(d_g));
  return grad_x - oracle.jvp_xy_g(x, y_t, d_g_batch, v);
}

Vector estimate_sgd(BilevelOracle& oracle, const Vector& x, const Vector& y_t, Vector& v,
                    int j_steps, double eta, int d_f, int d_g, int d, BatchSource& batches,
                    bool warm_start, const std::optional<VNormGuard>& guard) {
  check_loop_and_step(j_steps, eta, "estimate_sgd");
  check_batches(d_f, d_g, d, "estimate_sgd");
  if (!warm_start || v.size() == 0) {
    v = Vector::Zero(y_t.size());
  }
  if (v.size() != y_t.size()) throw InvalidState("estimate_sgd: carried iterate dimension mismatch");

  for (int j = 0; j < j_steps; ++j) {
    const BatchSpec hess_batch = batches.lower(static_cast<std::size_t>(d));
    const BatchSpec grad_batch = batches.upper(static_cast<std::size_t>(d_f));
    v -= eta * oracle.hvp_yy_g(x, y_t, hess_batch, v);
    v += eta * oracle.grad_y_f(x, y_t, grad_batch);
    ensure_finite(v, "estimate_sgd");
    guard_check(guard, v);
  }
  return assemble_hypergradient(oracle, x, y_t, v, d_f, d_g, batches);
}

Vector assemble_hypergradient(BilevelOracle& oracle, const Vector& x, const Vector& y,
                              const Vector& v, int d_f, int d_g, BatchSource& batches) {
  if (d_f < 1 || d_g < 1) {
    throw InvalidArgument("assemble_hypergradient: batch sizes must be >= 1");
  }
  if (v.size() != y.size()) {
    throw InvalidArgument("assemble_hypergradient: dimension mismatch");
  }
  const BatchSpec d_f_batch = batches.upper(static_cast<std::size_t>(d_f));
  const BatchSpec d_g_batch = batches.lower(static_cast<std::size_t>(d_g));
  return oracle.grad_x_f(x, y, d_f_batch) - oracle.jvp_xy_g(x, y, d_g_batch, v);
}

}  // namespace bilo
