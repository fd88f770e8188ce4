#pragma once

#include <functional>

#include "bilo/core/types.hpp"

namespace bilo::testing {

// Central-difference gradient of a scalar function.
template <typename F>
Vector central_gradient(F&& f, const Vector& x, double h = 1e-4) {
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double hi = f(probe);
    probe(i) = x(i) - h;
    const double lo = f(probe);
    probe(i) = x(i);
    grad(i) = (hi - lo) / (2.0 * h);
  }
  return grad;
}

// Four-point mixed partial  a^T (d/da)(d/db) g(a_dir, b_dir)  of a scalar
// function along directions da, db.
template <typename F>
double mixed_directional(F&& g, const Vector& a, const Vector& b, const Vector& da,
                         const Vector& db, double h = 1e-3) {
  const double pp = g(a + h * da, b + h * db);
  const double pm = g(a + h * da, b - h * db);
  const double mp = g(a - h * da, b + h * db);
  const double mm = g(a - h * da, b - h * db);
  return (pp - pm - mp + mm) / (4.0 * h * h);
}

inline double relative_error(const Vector& got, const Vector& expected) {
  const double scale = expected.norm();
  return (got - expected).norm() / (scale > 0 ? scale : 1.0);
}

inline double relative_error(double got, double expected) {
  const double scale = std::abs(expected);
  return std::abs(got - expected) / (scale > 0 ? scale : 1.0);
}

}  // namespace bilo::testing
