#include "bilo/algorithms/schedules.hpp"

#include <cmath>

namespace bilo {

double bsa_alpha(int k, double d_alpha) { return d_alpha / std::sqrt(1.0 + k); }

int bsa_inner_steps(int k) { return static_cast<int>(std::ceil(std::sqrt(k + 1.0))); }

double bsa_beta(int t, double d_beta) { return d_beta / (t + 2.0); }

double ttsa_alpha(int k, double d_alpha) { return d_alpha / std::pow(1.0 + k, 0.6); }

double ttsa_beta(int k, double d_beta) { return d_beta / std::pow(1.0 + k, 0.4); }

}  // namespace bilo
