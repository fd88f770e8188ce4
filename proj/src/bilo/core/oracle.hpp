#pragma once

#include <cstddef>

#include "bilo/core/batch.hpp"
#include "bilo/core/counters.hpp"
#include "bilo/core/types.hpp"

namespace bilo {

// Sampled first- and second-order derivative products of a stochastic
// bilevel pair (F, G). Batched values are the arithmetic mean of per-sample
// values. Instances are single-writer: the counters mutate, so one algorithm
// run owns one oracle.
class BilevelOracle {
 public:
  virtual ~BilevelOracle() = default;

  virtual Eigen::Index dim_x() const = 0;
  virtual Eigen::Index dim_y() const = 0;
  // Sizes of the finite xi- (upper) and zeta- (lower) sample distributions.
  virtual std::size_t num_upper_samples() const = 0;
  virtual std::size_t num_lower_samples() const = 0;

  Vector grad_x_f(const Vector& x, const Vector& y, const BatchSpec& batch);
  Vector grad_y_f(const Vector& x, const Vector& y, const BatchSpec& batch);
  Vector grad_y_g(const Vector& x, const Vector& y, const BatchSpec& batch);
  // Hessian-vector product  (d^2/dy^2) G(x, y; batch) * v.
  Vector hvp_yy_g(const Vector& x, const Vector& y, const BatchSpec& batch, const Vector& v);
  // Jacobian-vector product  (d/dx)(d/dy) G(x, y; batch) * v  (a dim_x vector).
  Vector jvp_xy_g(const Vector& x, const Vector& y, const BatchSpec& batch, const Vector& v);

  const ComplexityCounters& counters() const { return counters_; }
  ComplexityCounters counters_snapshot() const { return counters_; }
  void counters_reset() { counters_ = {}; }

  // Suspends counting for the enclosing scope. Used for evaluation-only work
  // (trace metrics, pre-loop estimates) that must stay outside the budget.
  class CountingPause {
   public:
    explicit CountingPause(BilevelOracle& oracle) : oracle_(oracle), prev_(oracle.counting_) {
      oracle_.counting_ = false;
    }
    ~CountingPause() { oracle_.counting_ = prev_; }
    CountingPause(const CountingPause&) = delete;
    CountingPause& operator=(const CountingPause&) = delete;

   private:
    BilevelOracle& oracle_;
    bool prev_;
  };

 protected:
  virtual Vector grad_x_f_impl(const Vector& x, const Vector& y, const BatchSpec& batch) = 0;
  virtual Vector grad_y_f_impl(const Vector& x, const Vector& y, const BatchSpec& batch) = 0;
  virtual Vector grad_y_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch) = 0;
  virtual Vector hvp_yy_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch,
                               const Vector& v) = 0;
  virtual Vector jvp_xy_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch,
                               const Vector& v) = 0;

 private:
  void count(std::uint64_t ComplexityCounters::* field, std::size_t amount) {
    if (counting_) counters_.*field += amount;
  }

  ComplexityCounters counters_;
  bool counting_ = true;
};

}  // namespace bilo
