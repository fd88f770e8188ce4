#pragma once

#include <span>

#include "bilo/estimators/estimators.hpp"
#include "bilo/theory/theory.hpp"

namespace bilo {

// Upper bound on the estimation bias |grad Phi(x) - E[h_f]| of the three
// hypergradient estimators, valid in the regime mu < 1, L < 1, beta = eta,
// 0 < eta <= 1/L.
//
//   dist_y   : |y^{k,T} - y*(x)|
//   dist_v0  : |v^{k,0} - v*| for SGD-based estimation, |H*| for BP/NS
//   ll_path  : |y^{k,s} - y*(x)| for s = 0..T-1, required for BP whenever
//              rho or tau is nonzero (its trajectory sum runs over past
//              iterates, not just the final one)
double bias_bound(const LipschitzProfile& profile, EstimatorMethod method, int t_steps,
                  int j_steps, double eta, double dist_y, double dist_v0,
                  std::span<const double> ll_path = {});

}  // namespace bilo
