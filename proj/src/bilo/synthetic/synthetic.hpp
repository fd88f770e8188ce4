#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>

#include "bilo/core/oracle.hpp"
#include "bilo/core/rng.hpp"
#include "bilo/core/types.hpp"

namespace bilo {

// Lazily computed, immutable-once-set value; safe for concurrent readers and
// copies share the computed result.
template <typename T>
class LazyCache {
 public:
  LazyCache() = default;
  LazyCache(const LazyCache& other) : value_(other.snapshot()) {}
  LazyCache& operator=(const LazyCache& other) {
    if (this != &other) {
      const std::scoped_lock lock(mutex_);
      value_ = other.snapshot();
    }
    return *this;
  }

  std::shared_ptr<const T> get(const std::function<T()>& compute) const {
    const std::scoped_lock lock(mutex_);
    if (!value_) value_ = std::make_shared<const T>(compute());
    return value_;
  }

 private:
  std::shared_ptr<const T> snapshot() const {
    const std::scoped_lock lock(mutex_);
    return value_;
  }

  mutable std::mutex mutex_;
  mutable std::shared_ptr<const T> value_;
};

struct SyntheticGenParams {
  std::size_t n_train = 10000;
  std::size_t n_val = 10000;
  double reg = 0.5;
  // Per-coordinate standard deviation of the first p-1 feature coordinates.
  double feature_std = 0.1;
  double noise_std = 1.0;
  // Scales every feature vector (including the trailing constant coordinate);
  // used to build small-spectrum instances for bound checks.
  double feature_scale = 1.0;
};

// Quadratic bilevel instance: least-squares upper/lower objectives tied by an
// r/2 * |y - x|^2 proximity term, with closed-form minimizer and hypergradient.
class SyntheticProblem {
 public:
  // Linear-model data: u_i = scale * (e_i, 1), v_i = w0^T u_i + noise.
  static SyntheticProblem generate(RngStream& rng, const Vector& w0,
                                   const SyntheticGenParams& params = {});

  // Explicit quadratic description without per-sample data. Closed forms are
  // available; the sampling oracle is not.
  SyntheticProblem(Matrix a_train, Vector b_train, Matrix a_val, Vector b_val, double reg,
                   double mean_v2_val = 0.0, double mean_v2_train = 0.0);

  Eigen::Index dim() const { return b_train_.size(); }
  double reg() const { return reg_; }
  const Matrix& a_train() const { return a_train_; }
  const Matrix& a_val() const { return a_val_; }
  const Vector& b_train() const { return b_train_; }
  const Vector& b_val() const { return b_val_; }
  const Vector& w0() const { return w0_; }

  bool has_data() const { return features_train_.rows() > 0; }
  std::size_t n_train() const { return static_cast<std::size_t>(features_train_.rows()); }
  std::size_t n_val() const { return static_cast<std::size_t>(features_val_.rows()); }
  const Matrix& features_train() const { return features_train_; }
  const Matrix& features_val() const { return features_val_; }
  const Vector& targets_train() const { return targets_train_; }
  const Vector& targets_val() const { return targets_val_; }

  // argmin_y g(x, y) = (A_tr + r I)^{-1} (b_tr + r x).
  Vector y_star(const Vector& x) const;
  // r (A_tr + r I)^{-1} (A_val y*(x) - b_val) + 3 |x| x.
  Vector grad_phi(const Vector& x) const;
  double phi(const Vector& x) const;

  // Full-batch objective values.
  double f_value(const Vector& x, const Vector& y) const;
  double g_value(const Vector& x, const Vector& y) const;

  double lambda_min_a_train() const;
  double lambda_max_a_train() const;
  double lambda_max_a_val() const;
  // (lambda_max(A_tr) + r) / (lambda_min(A_tr) + r)
  double ll_condition_number() const;

  void save(std::ostream& os) const;
  static SyntheticProblem load(std::istream& is);

 private:
  SyntheticProblem() = default;
  void finalize();

  Matrix a_train_, a_val_;
  Vector b_train_, b_val_;
  double reg_ = 0.5;
  double mean_v2_val_ = 0.0;
  double mean_v2_train_ = 0.0;
  Vector w0_;

  Matrix features_train_, features_val_;  // one row per sample
  Vector targets_train_, targets_val_;

  Eigen::LLT<Matrix> ll_solver_;  // factorization of A_tr + r I
  LazyCache<Vector> a_train_eigenvalues_;
  LazyCache<Vector> a_val_eigenvalues_;

  std::shared_ptr<const Vector> train_spectrum() const;
  std::shared_ptr<const Vector> val_spectrum() const;
};

std::unique_ptr<BilevelOracle> make_synthetic_oracle(const SyntheticProblem& problem);

}  // namespace bilo
