#pragma once

#include "bilo/core/oracle.hpp"
#include "bilo/estimators/estimators.hpp"

namespace bilo::testing {

// Brute-force dense counterparts of the matrix-free estimators. Derivative
// products are materialized column by column through the oracle (with
// counting paused); the estimator recursions are then evaluated as literal
// matrix products.

inline Matrix materialize_hessian(BilevelOracle& oracle, const Vector& x, const Vector& y,
                                  const BatchSpec& batch) {
  BilevelOracle::CountingPause pause(oracle);
  const Eigen::Index q = oracle.dim_y();
  Matrix h(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    h.col(j) = oracle.hvp_yy_g(x, y, batch, Vector::Unit(q, j));
  }
  return h;
}

inline Matrix materialize_jacobian(BilevelOracle& oracle, const Vector& x, const Vector& y,
                                   const BatchSpec& batch) {
  BilevelOracle::CountingPause pause(oracle);
  const Eigen::Index q = oracle.dim_y();
  Matrix j(oracle.dim_x(), q);
  for (Eigen::Index c = 0; c < q; ++c) {
    j.col(c) = oracle.jvp_xy_g(x, y, batch, Vector::Unit(q, c));
  }
  return j;
}

// Dense evaluation of the differentiated-SGD-path estimate: the per-step
// Jacobians weighted by ordered products of (I - beta H_i) over later steps.
inline Vector dense_bp(BilevelOracle& oracle, const Vector& x, const Vector& y_t,
                       const BpTape& tape, double beta, const BatchSpec& upper_batch) {
  BilevelOracle::CountingPause pause(oracle);
  const Vector grad_x = oracle.grad_x_f(x, y_t, upper_batch);
  if (tape.empty()) return grad_x;
  const Vector grad_y = oracle.grad_y_f(x, y_t, upper_batch);
  const Eigen::Index q = oracle.dim_y();
  const std::size_t t_steps = tape.size();

  Matrix total = Matrix::Zero(oracle.dim_x(), q);
  for (std::size_t t = 0; t < t_steps; ++t) {
    Matrix factor = Matrix::Identity(q, q);
    for (std::size_t i = t + 1; i < t_steps; ++i) {
      const Matrix h = materialize_hessian(oracle, x, tape[i].y, tape[i].batch);
      factor = factor * (Matrix::Identity(q, q) - beta * h);
    }
    total += materialize_jacobian(oracle, x, tape[t].y, tape[t].batch) * factor;
  }
  return grad_x - beta * (total * grad_y);
}

// eta * sum_{j<J} (I - eta H)^j g
inline Vector dense_neumann_v(const Matrix& hessian, const Vector& g, int j_steps, double eta) {
  const Eigen::Index q = hessian.rows();
  const Matrix step = Matrix::Identity(q, q) - eta * hessian;
  Matrix power = Matrix::Identity(q, q);
  Vector v = Vector::Zero(q);
  for (int j = 0; j < j_steps; ++j) {
    v += power * g;
    power = power * step;
  }
  return eta * v;
}

// (I - eta H)^J v0 + eta * sum_{t<J} (I - eta H)^{J-1-t} g
inline Vector dense_sgd_v(const Matrix& hessian, const Vector& g, const Vector& v0, int j_steps,
                          double eta) {
  const Eigen::Index q = hessian.rows();
  const Matrix step = Matrix::Identity(q, q) - eta * hessian;
  Vector v = v0;
  for (int j = 0; j < j_steps; ++j) {
    v = step * v + eta * g;
  }
  return v;
}

// Full-batch lower-level solve by Newton iterations on the materialized
// Hessian (quadratically convergent; used as an independent minimizer).
inline Vector newton_ll_solve(BilevelOracle& oracle, const Vector& x, Vector y, int iterations = 30,
                              double tol = 1e-12) {
  BilevelOracle::CountingPause pause(oracle);
  const BatchSpec batch = full_batch(oracle.num_lower_samples());
  for (int it = 0; it < iterations; ++it) {
    const Vector grad = oracle.grad_y_g(x, y, batch);
    if (grad.norm() < tol) break;
    const Matrix hess = materialize_hessian(oracle, x, y, batch);
    y -= Eigen::LLT<Matrix>(hess).solve(grad);
  }
  return y;
}

}  // namespace bilo::testing
