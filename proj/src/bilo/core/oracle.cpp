#include "bilo/core/oracle.hpp"

namespace bilo {

Vector BilevelOracle::grad_x_f(const Vector& x, const Vector& y, const BatchSpec& batch) {
  count(&ComplexityCounters::gc_f, batch.size());
  Vector out = grad_x_f_impl(x, y, batch);
  ensure_finite(out, "grad_x_f");
  return out;
}

Vector BilevelOracle::grad_y_f(const Vector& x, const Vector& y, const BatchSpec& batch) {
  count(&ComplexityCounters::gc_f, batch.size());
  Vector out = grad_y_f_impl(x, y, batch);
  ensure_finite(out, "grad_y_f");
  return out;
}

Vector BilevelOracle::grad_y_g(const Vector& x, const Vector& y, const BatchSpec& batch) {
  count(&ComplexityCounters::gc_g, batch.size());
  Vector out = grad_y_g_impl(x, y, batch);
  ensure_finite(out, "grad_y_g");
  return out;
}

Vector BilevelOracle::hvp_yy_g(const Vector& x, const Vector& y, const BatchSpec& batch,
                               const Vector& v) {
  count(&ComplexityCounters::hv_g, batch.size());
  Vector out = hvp_yy_g_impl(x, y, batch, v);
  ensure_finite(out, "hvp_yy_g");
  return out;
}

Vector BilevelOracle::jvp_xy_g(const Vector& x, const Vector& y, const BatchSpec& batch,
                               const Vector& v) {
  count(&ComplexityCounters::jv_g, batch.size());
  Vector out = jvp_xy_g_impl(x, y, batch, v);
  ensure_finite(out, "jvp_xy_g");
  return out;
}

}  // namespace bilo
