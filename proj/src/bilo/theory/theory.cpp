#include "bilo/theory/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bilo {

namespace {

// ceil with a tolerance so that exactly-integer ratios (e.g. log(1/16)/log(1/2))
// do not round up from floating-point noise.
std::int64_t ceil_with_slack(double value) {
  return static_cast<std::int64_t>(std::ceil(value - 1e-9));
}

double pos_or_throw(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidState(std::string("prescribed parameters: ") + name + " is not positive");
  }
  return value;
}

}  // namespace

void LipschitzProfile::validate() const {
  if (!(M > 0.0) || !(L > 0.0) || !(mu > 0.0)) {
    throw InvalidArgument("profile: M, L, and mu must be positive");
  }
  if (mu > L) throw InvalidArgument("profile: mu must not exceed L");
  if (tau < 0.0 || rho < 0.0 || sigma_f_sq < 0.0 || sigma_g_sq < 0.0 || sigma_g1_sq < 0.0 ||
      sigma_g2_sq < 0.0) {
    throw InvalidArgument("profile: constants must be non-negative");
  }
}

LipschitzProfile measure_profile(const SyntheticProblem& problem, double domain_radius) {
  if (domain_radius <= 0.0) throw InvalidArgument("measure_profile: radius must be positive");
  const double r = problem.reg();
  const double lmin_tr = problem.lambda_min_a_train();
  const double lmax_val = problem.lambda_max_a_val();

  LipschitzProfile profile;
  profile.mu = lmin_tr + r;
  profile.tau = 0.0;  // cross Jacobian of g is the constant -r I
  profile.rho = 0.0;  // Hessian of g is constant

  // Gradient Lipschitz constant of g: largest eigenvalue of the constant full
  // Hessian [[r I, -r I], [-r I, A_tr + r I]], computed per A_tr eigenvalue
  // from the corresponding 2x2 block.
  Eigen::SelfAdjointEigenSolver<Matrix> es(problem.a_train(), Eigen::EigenvaluesOnly);
  double l_g = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    const double tr = lam + 2.0 * r;
    const double det = r * lam;  // r(lam + r) - r^2
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    l_g = std::max(l_g, 0.5 * (tr + disc));
  }
  // Gradient Lipschitz constant of f: block-diagonal Hessian; the cube-norm
  // block is bounded by 6R on the ball of radius R.
  const double l_f = std::max(lmax_val, 6.0 * domain_radius);
  profile.L = std::max({l_g, l_f, profile.mu});

  // M: sup of |grad f| over the ball.
  const double sup_grad_y = lmax_val * domain_radius + problem.b_val().norm();
  const double sup_grad_x = 3.0 * domain_radius * domain_radius;
  profile.M = std::hypot(sup_grad_x, sup_grad_y);

  if (problem.has_data()) {
    // Population variances at (x, y) = (0, 0) by direct summation. The
    // cross-Jacobian of G is sample-independent, so sigma_g1 is exactly zero.
    const Vector x0 = Vector::Zero(problem.dim());
    const Vector y0 = Vector::Zero(problem.dim());

    const Matrix& uv = problem.features_val();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < uv.rows(); ++i) {
      const Vector gi = -problem.targets_val()(i) * uv.row(i).transpose();
      acc += (gi + problem.b_val()).squaredNorm();
    }
    profile.sigma_f_sq = acc / static_cast<double>(uv.rows());

    const Matrix& ut = problem.features_train();
    acc = 0.0;
    for (Eigen::Index i = 0; i < ut.rows(); ++i) {
      const Vector gi = -problem.targets_train()(i) * ut.row(i).transpose();
      acc += (gi + problem.b_train()).squaredNorm();
    }
    profile.sigma_g_sq = acc / static_cast<double>(ut.rows());

    profile.sigma_g1_sq = 0.0;

    acc = 0.0;
    for (Eigen::Index i = 0; i < ut.rows(); ++i) {
      Matrix dev = ut.row(i).transpose() * ut.row(i) - problem.a_train();
      Eigen::SelfAdjointEigenSolver<Matrix> dev_es(dev, Eigen::EigenvaluesOnly);
      const double spec = std::max(std::abs(dev_es.eigenvalues().minCoeff()),
                                   std::abs(dev_es.eigenvalues().maxCoeff()));
      acc += spec * spec;
    }
    profile.sigma_g2_sq = acc / static_cast<double>(ut.rows());
  }

  profile.validate();
  return profile;
}

double l_phi(const LipschitzProfile& p) {
  p.validate();
  const double mu = p.mu, L = p.L, M = p.M, tau = p.tau, rho = p.rho;
  return L + (2.0 * L * L + tau * M * M) / mu +
         (rho * L * M + L * L * L + tau * M * L) / (mu * mu) +
         (rho * L * L * M) / (mu * mu * mu);
}

AnyLoopParams any_loop_params(const LipschitzProfile& profile, int j_steps, double rho2_scale) {
  profile.validate();
  if (j_steps < 1) throw InvalidArgument("any_loop_params: J must be >= 1");
  if (rho2_scale <= 0.0) throw InvalidArgument("any_loop_params: rho2 scale must be positive");
  const double mu = profile.mu, L = profile.L, M = profile.M;
  const double kappa = profile.kappa();

  AnyLoopParams out;
  out.eta = 1.0 / (2.0 * L);
  out.beta = 3.0 / (2.0 * (L + mu));
  out.r_v = 2.0 * mu * L / (L * L + mu * mu);
  out.r_w = out.eta * mu / (7.0 * (2.0 - out.eta * mu));
  out.rho_y = 2.0 * out.beta * mu * L / (mu + L);
  out.c_1 = M * profile.rho / (mu * mu) + L / mu;
  out.c_bar_1 = L + M * profile.tau / mu;
  const double rw = out.r_w;
  out.c_21 = std::pow(1.0 - out.eta * mu, j_steps) * (1.0 + rw) * (1.0 + rw);
  out.c_22 = (1.0 + 1.0 / rw) * (2.0 + 8.0 * L * L / (mu * mu)) * out.c_1 * out.c_1;
  out.c_23 = (1.0 + 1.0 / rw) * (5.0 + rw) * out.c_1 * out.c_1;
  out.c_24 = (1.0 + 1.0 / rw) * (9.0 + 8.0 * rw) * out.c_1 * out.c_1;
  out.rho_2 = rho2_scale * std::pow(kappa, -4.0);

  const double denom = out.rho_y * (1.0 + out.r_v) - out.r_v;
  if (!(denom > 0.0)) {
    throw InvalidState("any_loop_params: rho_y (1 + r_v) <= r_v, rho_1 undefined");
  }
  out.rho_1 = 2.0 * out.rho_2 * ((1.0 + rw) * out.c_23 + 2.0 * out.c_24) / denom;
  out.l_31 = l_phi(profile) / 2.0 +
             2.0 * ((out.rho_1 + out.c_24 * out.rho_2) * (2.0 / out.r_v) * (L * L) / (mu * mu) +
                    (1.0 + rw) * out.c_22 * out.rho_2);

  out.alpha_candidates[0] = 1.0 / (2.0 * out.l_31);
  out.alpha_candidates[1] = out.rho_2 * out.eta * mu / (4.0 * L * L);
  out.alpha_candidates[2] =
      ((1.0 + rw) * out.c_23 + 2.0 * out.c_24) * out.rho_2 / (out.c_bar_1 * out.c_bar_1);
  out.alpha = std::min({out.alpha_candidates[0], out.alpha_candidates[1], out.alpha_candidates[2]});

  pos_or_throw(out.rho_1, "rho_1");
  pos_or_throw(out.l_31, "L_31");
  pos_or_throw(out.alpha, "alpha");
  return out;
}

ScaledLoopParams scaled_loop_params(const LipschitzProfile& profile, double rho2_scale) {
  profile.validate();
  if (rho2_scale <= 0.0) throw InvalidArgument("scaled_loop_params: rho2 scale must be positive");
  const double mu = profile.mu, L = profile.L, M = profile.M;
  const double kappa = profile.kappa();

  ScaledLoopParams out;
  out.r_v = 1.0;
  out.r_w = 1.0;
  out.eta = 1.0 / (2.0 * L);
  out.beta = 1.0 / (2.0 * L);
  out.c_1 = M * profile.rho / (mu * mu) + L / mu;
  out.c_bar_1 = L + M * profile.tau / mu;
  out.c_22 = 2.0 * (2.0 + 8.0 * L * L / (mu * mu)) * out.c_1 * out.c_1;
  out.c_23 = 2.0 * 6.0 * out.c_1 * out.c_1;   // (1 + 1/r_w)(5 + r_w) at r_w = 1
  out.c_24 = 2.0 * 17.0 * out.c_1 * out.c_1;  // (1 + 1/r_w)(9 + 8 r_w) at r_w = 1
  out.rho_2 = rho2_scale * std::pow(kappa, -3.0);
  out.rho_1 = 2.0 * out.rho_2 * (1.0 + out.r_w) * out.c_23;
  out.l_31 = l_phi(profile) / 2.0 +
             2.0 * (out.rho_1 * L * L / (4.0 * mu * mu) + out.rho_2 * (1.0 + out.r_w) * out.c_22);

  out.alpha_candidates[0] = 1.0 / (2.0 * out.l_31);
  out.alpha_candidates[1] = out.rho_2 / (4.0 * L * L);
  out.alpha_candidates[2] =
      0.5 * out.rho_2 * (1.0 + out.r_w) * out.c_23 / (out.c_bar_1 * out.c_bar_1);
  out.alpha = std::min({out.alpha_candidates[0], out.alpha_candidates[1], out.alpha_candidates[2]});

  const double t_ratio = std::log(out.rho_1 / (8.0 * (out.rho_1 + out.c_24 * out.rho_2))) /
                         std::log(L / (mu + L));
  out.t_min = std::max<std::int64_t>(1, ceil_with_slack(t_ratio));
  const double j_ratio = std::log(1.0 / (4.0 * (1.0 + out.r_w) * (1.0 + out.r_w))) /
                         std::log(1.0 - out.eta * mu);
  out.j_min = std::max<std::int64_t>(1, ceil_with_slack(j_ratio));

  pos_or_throw(out.rho_1, "rho_1");
  pos_or_throw(out.l_31, "L_31");
  pos_or_throw(out.alpha, "alpha");
  return out;
}

std::string constants_report(const LipschitzProfile& profile, int j_steps) {
  std::ostringstream os;
  os.precision(10);
  os << "profile:\n"
     << "  M        = " << profile.M << "\n"
     << "  L        = " << profile.L << "\n"
     << "  tau      = " << profile.tau << "\n"
     << "  rho      = " << profile.rho << "\n"
     << "  mu       = " << profile.mu << "\n"
     << "  kappa    = " << profile.kappa() << "\n"
     << "  sigma_f^2  = " << profile.sigma_f_sq << "\n"
     << "  sigma_g^2  = " << profile.sigma_g_sq << "\n"
     << "  sigma_g1^2 = " << profile.sigma_g1_sq << "\n"
     << "  sigma_g2^2 = " << profile.sigma_g2_sq << "\n"
     << "  L_Phi    = " << l_phi(profile) << "\n";
  const AnyLoopParams t1 = any_loop_params(profile, j_steps);
  os << "any-T/any-J prescription (J = " << j_steps << "):\n"
     << "  alpha = " << t1.alpha << "  beta = " << t1.beta << "  eta = " << t1.eta << "\n"
     << "  r_v = " << t1.r_v << "  r_w = " << t1.r_w << "  rho_y = " << t1.rho_y << "\n"
     << "  rho_1 = " << t1.rho_1 << "  rho_2 = " << t1.rho_2 << "  L_31 = " << t1.l_31 << "\n"
     << "  C_1 = " << t1.c_1 << "  C_21 = " << t1.c_21 << "  C_22 = " << t1.c_22
     << "  C_23 = " << t1.c_23 << "  C_24 = " << t1.c_24 << "\n";
  const ScaledLoopParams t2 = scaled_loop_params(profile);
  os << "restricted-T/J prescription:\n"
     << "  alpha = " << t2.alpha << "  beta = " << t2.beta << "  eta = " << t2.eta << "\n"
     << "  T_min = " << t2.t_min << "  J_min = " << t2.j_min << "\n"
     << "  rho_1 = " << t2.rho_1 << "  rho_2 = " << t2.rho_2 << "  L_31 = " << t2.l_31 << "\n";
  return os.str();
}

}  // namespace bilo
