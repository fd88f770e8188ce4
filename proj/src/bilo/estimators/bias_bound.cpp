#include "bilo/estimators/bias_bound.hpp"

#include <cmath>

namespace bilo {

double bias_bound(const LipschitzProfile& profile, EstimatorMethod method, int t_steps,
                  int j_steps, double eta, double dist_y, double dist_v0,
                  std::span<const double> ll_path) {
  profile.validate();
  const double mu = profile.mu, L = profile.L, M = profile.M;
  if (!(mu < 1.0)) throw InvalidArgument("bias_bound: regime requires mu < 1");
  if (!(L < 1.0)) throw InvalidArgument("bias_bound: regime requires L < 1");
  if (!(eta > 0.0) || !(eta <= 1.0 / L)) {
    throw InvalidArgument("bias_bound: regime requires 0 < eta <= 1/L (with beta = eta)");
  }
  if (t_steps < 0 || j_steps < 0) throw InvalidArgument("bias_bound: negative loop bound");
  if (dist_y < 0.0 || dist_v0 < 0.0) throw InvalidArgument("bias_bound: negative distance");

  const double contraction = 1.0 - eta * mu;
  auto geometric_sum = [contraction](int n) {
    double sum = 0.0, term = 1.0;
    for (int t = 0; t < n; ++t) {
      sum += term;
      term *= contraction;
    }
    return sum;
  };

  switch (method) {
    case EstimatorMethod::StochasticBP: {
      const double path_factor = M * eta * (L / mu * profile.rho + profile.tau);
      double path_sum = 0.0;
      if (path_factor > 0.0) {
        if (static_cast<int>(ll_path.size()) != t_steps) {
          throw InvalidArgument(
              "bias_bound: BP with nonzero rho/tau needs the per-step distances |y^{k,s} - y*|");
        }
        double weight = 1.0;
        for (int t = 0; t < t_steps; ++t) {
          path_sum += weight * ll_path[static_cast<std::size_t>(t_steps - 1 - t)];
          weight *= contraction;
        }
      }
      return L * (1.0 + L / mu) * dist_y + M * std::pow(contraction, t_steps) * dist_v0 +
             path_factor * path_sum;
    }
    case EstimatorMethod::StochasticNS: {
      return L * (1.0 + L / mu) * dist_y + M * std::pow(contraction, j_steps) * dist_v0 +
             M * eta * (L / mu * profile.rho + profile.tau) * geometric_sum(j_steps) * dist_y;
    }
    case EstimatorMethod::SgdEstimation: {
      return (L + M / mu * profile.tau) * dist_y +
             L * std::pow(contraction, j_steps) * dist_v0 +
             L * eta * (M / mu * profile.rho + L) * geometric_sum(j_steps) * dist_y;
    }
  }
  throw InvalidArgument("bias_bound: unknown method");
}

}  // namespace bilo
