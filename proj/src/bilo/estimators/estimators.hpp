#pragma once

#include <optional>
#include <vector>

#include "bilo/core/batch.hpp"
#include "bilo/core/oracle.hpp"
#include "bilo/core/types.hpp"

namespace bilo {

enum class EstimatorMethod { StochasticBP, StochasticNS, SgdEstimation };

const char* estimator_name(EstimatorMethod method);

// Carried pair of lower-level iterate and linear-system iterate.
struct WarmState {
  Vector y;
  Vector v;
};

// One recorded lower-level SGD step: the batch drawn and the iterate the step
// was taken from. Replaying the tape right-to-left reproduces the
// differentiated update path matrix-free.
struct BpTapeStep {
  BatchSpec batch;
  Vector y;
};
using BpTape = std::vector<BpTapeStep>;

struct LlSgdResult {
  Vector y;
  BpTape tape;  // empty unless recording was requested
};

// T steps of SGD on the lower-level objective from y0 at fixed x.
LlSgdResult ll_sgd(BilevelOracle& oracle, const Vector& x, const Vector& y0, int steps,
                   double beta, int batch_size, BatchSource& batches, bool record_tape = false);

// Optional runtime guard: with |v0| <= limit and eta <= 1/L (per-sample L),
// every linear-system iterate stays within limit. Checked in debug builds.
struct VNormGuard {
  double limit;
};

// Backpropagation through the recorded SGD path. Uses one batch draw for both
// partial derivatives of F.
Vector estimate_bp(BilevelOracle& oracle, const Vector& x, const Vector& y_t, const BpTape& tape,
                   double beta, int d_f, BatchSource& batches);

// Truncated Neumann-series estimate of the Hessian-inverse-vector product,
// evaluated with a Horner-style recursion (J-1 Hessian-vector products).
Vector estimate_ns(BilevelOracle& oracle, const Vector& x, const Vector& y_t, int j_steps,
                   double eta, int d_f, int d_g, int d, BatchSource& batches,
                   const std::optional<VNormGuard>& guard = std::nullopt);

// J SGD steps on the quadratic reformulation of the linear system. v is the
// carried iterate: it is read when warm_start is set, zeroed otherwise, and
// always updated in place with the final iterate.
Vector estimate_sgd(BilevelOracle& oracle, const Vector& x, const Vector& y_t, Vector& v,
                    int j_steps, double eta, int d_f, int d_g, int d, BatchSource& batches,
                    bool warm_start, const std::optional<VNormGuard>& guard = std::nullopt);

// grad_x F(x,y;D_F) - (d/dx)(d/dy) G(x,y;D_G) v  with independent batches.
Vector assemble_hypergradient(BilevelOracle& oracle, const Vector& x, const Vector& y,
                              const Vector& v, int d_f, int d_g, BatchSource& batches);

}  // namespace bilo
