#pragma once

#include <cstdint>
#include <string>

#include "bilo/synthetic/synthetic.hpp"

namespace bilo {

// Problem regularity constants. tau/rho and the variance bounds may be zero
// (they are exactly zero for quadratic instances); M, L, mu must be positive
// with mu <= L.
struct LipschitzProfile {
  double M = 0.0;    // function-value Lipschitz constant of f
  double L = 0.0;    // gradient Lipschitz constant of f and g
  double tau = 0.0;  // Lipschitz constant of the cross Jacobian of g
  double rho = 0.0;  // Lipschitz constant of the Hessian of g
  double mu = 0.0;   // strong-convexity modulus of g in y
  double sigma_f_sq = 0.0;
  double sigma_g_sq = 0.0;
  double sigma_g1_sq = 0.0;
  double sigma_g2_sq = 0.0;

  double kappa() const { return L / mu; }
  void validate() const;
};

// Instance-derived profile for a quadratic problem: exact spectra for mu and
// L, tau = rho = 0, M over the ball of the given radius, variances by direct
// summation over the datasets at the reference point (x, y) = (0, 0).
LipschitzProfile measure_profile(const SyntheticProblem& problem, double domain_radius);

// Smoothness constant of the reduced objective:
// L + (2L^2 + tau M^2)/mu + (rho L M + L^3 + tau M L)/mu^2 + rho L^2 M / mu^3.
double l_phi(const LipschitzProfile& profile);

struct AnyLoopParams {
  double alpha = 0.0, beta = 0.0, eta = 0.0;
  double r_v = 0.0, r_w = 0.0, rho_y = 0.0;
  double rho_1 = 0.0, rho_2 = 0.0;
  double l_31 = 0.0;
  double c_1 = 0.0, c_21 = 0.0, c_22 = 0.0, c_23 = 0.0, c_24 = 0.0;
  double c_bar_1 = 0.0;
  double alpha_candidates[3] = {0.0, 0.0, 0.0};
};

// Step sizes and constants of the any-T/any-J convergence regime. c_21
// depends on the run's J; rho_2 has order kappa^-4 with the proportionality
// constant fixed to rho2_scale (default 1).
AnyLoopParams any_loop_params(const LipschitzProfile& profile, int j_steps,
                               double rho2_scale = 1.0);

struct ScaledLoopParams {
  double alpha = 0.0, beta = 0.0, eta = 0.0;
  double r_v = 1.0, r_w = 1.0;
  double rho_1 = 0.0, rho_2 = 0.0;
  double l_31 = 0.0;
  double c_1 = 0.0, c_22 = 0.0, c_23 = 0.0, c_24 = 0.0;
  double c_bar_1 = 0.0;
  std::int64_t t_min = 0, j_min = 0;
  double alpha_candidates[3] = {0.0, 0.0, 0.0};
};

// Lower-complexity regime: prescribes minimum loop lengths T and J alongside
// the step sizes. rho_2 has order kappa^-3, proportionality rho2_scale.
ScaledLoopParams scaled_loop_params(const LipschitzProfile& profile, double rho2_scale = 1.0);

// Human-readable report of a profile and both parameter prescriptions.
std::string constants_report(const LipschitzProfile& profile, int j_steps = 1);

}  // namespace bilo
