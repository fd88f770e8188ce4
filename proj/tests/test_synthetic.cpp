#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bilo/synthetic/synthetic.hpp"
#include "support/dense_reference.hpp"
#include "support/finite_diff.hpp"

using namespace bilo;
using namespace bilo::testing;

namespace {

SyntheticProblem generated_problem(std::size_t n = 400, std::uint64_t seed = 3) {
  RngStream rng(seed);
  Vector w0(3);
  w0 << 2.0, 5.0, 7.0;
  SyntheticGenParams params;
  params.n_train = n;
  params.n_val = n;
  return SyntheticProblem::generate(rng, w0, params);
}

// Two training samples u = sqrt(3) e1, u = sqrt(7) e2 give A_tr = diag(1.5, 3.5).
SyntheticProblem handmade_two_sample_problem() {
  std::ostringstream os;
  os.precision(17);
  const double s3 = std::sqrt(3.0), s7 = std::sqrt(7.0);
  os << "bilo-synthetic 1\n";
  os << "reg 0.5\n";
  os << "mean_v2_val " << 0.5 * (16.0 / 3.0 + 64.0 / 7.0) << "\n";
  os << "mean_v2_train 0\n";
  os << "w0 1 2\n0 0\n";
  os << "features_train 2 2\n" << s3 << " 0\n0 " << s7 << "\n";
  os << "targets_train 1 2\n0 0\n";
  os << "features_val 2 2\n" << s3 << " 0\n0 " << s7 << "\n";
  // targets chosen so b_val = mean v_i u_i = (-2, -4)
  os << "targets_val 1 2\n" << -4.0 / s3 << ' ' << -8.0 / s7 << "\n";
  os << "a_train 2 2\n1.5 0\n0 3.5\n";
  os << "b_train 1 2\n0 0\n";
  os << "a_val 2 2\n1.5 0\n0 3.5\n";
  os << "b_val 1 2\n-2 -4\n";
  std::istringstream is(os.str());
  return SyntheticProblem::load(is);
}

}  // namespace

TEST_CASE("y_star with identity matrices") {
  const Matrix eye = Matrix::Identity(3, 3);
  const SyntheticProblem problem(eye, Vector::Zero(3), eye, Vector::Zero(3), 0.5);
  Vector x(3);
  x << 3.0, 3.0, 3.0;
  CHECK((problem.y_star(x) - Vector::Ones(3)).norm() <= 1e-14);
  CHECK(problem.y_star(Vector::Zero(3)).norm() == 0.0);
}

TEST_CASE("grad_phi with identity matrices") {
  const Matrix eye = Matrix::Identity(3, 3);
  const SyntheticProblem problem(eye, Vector::Zero(3), eye, Vector::Zero(3), 0.5);
  CHECK(problem.grad_phi(Vector::Zero(3)).norm() == 0.0);
  const Vector g = problem.grad_phi(Vector::Unit(3, 0));
  const Vector expected = (1.0 / 9.0 + 3.0) * Vector::Unit(3, 0);
  CHECK((g - expected).norm() <= 1e-14);
}

TEST_CASE("closed-form minimizer agrees with an iterative solve") {
  const SyntheticProblem problem = generated_problem();
  const Vector x = Vector::Ones(3);
  const Vector expected = problem.y_star(x);

  const double step = 1.0 / (problem.lambda_max_a_train() + problem.reg());
  Vector y = Vector::Zero(3);
  for (int t = 0; t < 2000; ++t) {
    const Vector grad = problem.a_train() * y - problem.b_train() + problem.reg() * (y - x);
    y -= step * grad;
  }
  CHECK((y - expected).norm() <= 1e-8);
}

TEST_CASE("grad_phi matches finite differences of phi") {
  const SyntheticProblem problem = generated_problem();
  RngStream rng(9);
  Vector x(3);
  for (int i = 0; i < 3; ++i) x(i) = rng.next_normal();
  const Vector fd = central_gradient([&](const Vector& p) { return problem.phi(p); }, x);
  CHECK(relative_error(fd, problem.grad_phi(x)) <= 1e-5);
}

TEST_CASE("degenerate generator collapses to the constant feature") {
  RngStream rng(5);
  Vector w0(3);
  w0 << 2.0, 5.0, 7.0;
  SyntheticGenParams params;
  params.n_train = 50;
  params.n_val = 50;
  params.feature_std = 0.0;
  params.noise_std = 0.0;
  const SyntheticProblem problem = SyntheticProblem::generate(rng, w0, params);
  Matrix expected_a = Matrix::Zero(3, 3);
  expected_a(2, 2) = 1.0;
  CHECK((problem.a_train() - expected_a).norm() <= 1e-14);
  CHECK((problem.b_train() - 7.0 * Vector::Unit(3, 2)).norm() <= 1e-14);
}

TEST_CASE("full-scale generator defaults") {
  RngStream rng(1);
  Vector w0(3);
  w0 << 2.0, 5.0, 7.0;
  const SyntheticProblem problem = SyntheticProblem::generate(rng, w0, {});
  CHECK(problem.n_train() == 10000);
  CHECK(problem.n_val() == 10000);
  CHECK(problem.reg() == 0.5);
}

TEST_CASE("generator rejects dimension below 2") {
  RngStream rng(1);
  CHECK_THROWS_AS(SyntheticProblem::generate(rng, Vector::Ones(1), {}), InvalidArgument);
}

TEST_CASE("higher-dimensional instance has a finite condition number") {
  RngStream rng(2);
  Vector w0(500);
  w0.setConstant(6.0);
  w0(0) = 1.0;
  w0(1) = 4.0;
  SyntheticGenParams params;
  params.n_train = 1000;
  params.n_val = 1000;
  const SyntheticProblem problem = SyntheticProblem::generate(rng, w0, params);
  const double kappa = problem.ll_condition_number();
  CHECK(std::isfinite(kappa));
  CHECK(kappa >= 1.0);
}

TEST_CASE("oracle products on a handmade instance") {
  const SyntheticProblem problem = handmade_two_sample_problem();
  auto oracle = make_synthetic_oracle(problem);
  const Vector x = Vector::Zero(2), y = Vector::Zero(2);

  // single-sample Hessian product: u = sqrt(3) e1 is orthogonal to e2
  BatchSpec first_only;
  first_only.indices = {0};
  const Vector hv = oracle->hvp_yy_g(x, y, first_only, Vector::Unit(2, 1));
  CHECK((hv - 0.5 * Vector::Unit(2, 1)).norm() <= 1e-15);

  // cross Jacobian is exactly -r I
  RngStream rng(3);
  Vector v(2);
  v << rng.next_normal(), rng.next_normal();
  const Vector jv = oracle->jvp_xy_g(x, y, first_only, v);
  CHECK((jv + 0.5 * v).norm() == 0.0);
}

TEST_CASE("full-batch lower gradient vanishes at the closed-form minimizer") {
  const SyntheticProblem problem = generated_problem();
  auto oracle = make_synthetic_oracle(problem);
  const Vector x = Vector::Ones(3);
  const Vector ys = problem.y_star(x);
  const Vector grad = oracle->grad_y_g(x, ys, full_batch(problem.n_train()));
  CHECK(grad.norm() <= 1e-10);
}

TEST_CASE("implicit-differentiation formula from oracle pieces matches grad_phi") {
  const SyntheticProblem problem = generated_problem();
  auto oracle = make_synthetic_oracle(problem);
  RngStream rng(21);
  Vector x(3);
  for (int i = 0; i < 3; ++i) x(i) = rng.next_normal();
  const Vector ys = problem.y_star(x);
  const BatchSpec train = full_batch(problem.n_train());
  const BatchSpec val = full_batch(problem.n_val());

  const Matrix hess = materialize_hessian(*oracle, x, ys, train);
  const Vector v = Eigen::LLT<Matrix>(hess).solve(oracle->grad_y_f(x, ys, val));
  const Vector h = oracle->grad_x_f(x, ys, val) - oracle->jvp_xy_g(x, ys, train, v);
  CHECK(relative_error(h, problem.grad_phi(x)) <= 1e-8);
}

TEST_CASE("full-batch derivatives match finite differences of the objectives") {
  const SyntheticProblem problem = generated_problem(200, 11);
  auto oracle = make_synthetic_oracle(problem);
  RngStream rng(23);
  Vector x(3), y(3);
  for (int i = 0; i < 3; ++i) {
    x(i) = rng.next_normal();
    y(i) = rng.next_normal();
  }
  const BatchSpec train = full_batch(problem.n_train());
  const BatchSpec val = full_batch(problem.n_val());

  const Vector fd_y_f =
      central_gradient([&](const Vector& p) { return problem.f_value(x, p); }, y);
  CHECK(relative_error(fd_y_f, oracle->grad_y_f(x, y, val)) <= 1e-5);

  const Vector fd_x_f =
      central_gradient([&](const Vector& p) { return problem.f_value(p, y); }, x);
  CHECK(relative_error(fd_x_f, oracle->grad_x_f(x, y, val)) <= 1e-5);

  const Vector fd_y_g =
      central_gradient([&](const Vector& p) { return problem.g_value(x, p); }, y);
  CHECK(relative_error(fd_y_g, oracle->grad_y_g(x, y, train)) <= 1e-5);

  Vector w(3), a(3);
  for (int i = 0; i < 3; ++i) {
    w(i) = rng.next_normal();
    a(i) = rng.next_normal();
  }
  const double hvp_fd = mixed_directional(
      [&](const Vector& y1, const Vector& y2) { return problem.g_value(x, y1 + (y2 - y)); }, y, y,
      a, w);
  const double hvp_got = a.dot(oracle->hvp_yy_g(x, y, train, w));
  CHECK(relative_error(hvp_fd, hvp_got) <= 1e-5);

  const double jvp_fd = mixed_directional(
      [&](const Vector& xx, const Vector& yy) { return problem.g_value(xx, yy); }, x, y, a, w);
  const double jvp_got = a.dot(oracle->jvp_xy_g(x, y, train, w));
  CHECK(relative_error(jvp_fd, jvp_got) <= 1e-5);
}

TEST_CASE("lower-level strong convexity witness") {
  const SyntheticProblem problem = generated_problem();
  auto oracle = make_synthetic_oracle(problem);
  RngStream rng(31);
  const Vector x = Vector::Zero(3);
  const BatchSpec train = full_batch(problem.n_train());
  for (int trial = 0; trial < 10; ++trial) {
    Vector y1(3), y2(3);
    for (int i = 0; i < 3; ++i) {
      y1(i) = rng.next_normal();
      y2(i) = rng.next_normal();
    }
    const Vector diff = oracle->grad_y_g(x, y1, train) - oracle->grad_y_g(x, y2, train);
    CHECK(diff.dot(y1 - y2) >= problem.reg() * (y1 - y2).squaredNorm() - 1e-12);
  }
}

TEST_CASE("minimizer map is Lipschitz with the sharp instance constant") {
  const SyntheticProblem problem = generated_problem();
  const double constant = problem.reg() / (problem.lambda_min_a_train() + problem.reg());
  RngStream rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x1(3), x2(3);
    for (int i = 0; i < 3; ++i) {
      x1(i) = rng.next_normal();
      x2(i) = rng.next_normal();
    }
    const double lhs = (problem.y_star(x1) - problem.y_star(x2)).norm();
    CHECK(lhs <= constant * (x1 - x2).norm() * (1.0 + 1e-12) + 1e-14);
  }
}

TEST_CASE("save/load round trip preserves the instance") {
  const SyntheticProblem problem = generated_problem(50, 13);
  std::stringstream buffer;
  problem.save(buffer);
  const SyntheticProblem loaded = SyntheticProblem::load(buffer);

  Vector x(3);
  x << 0.3, -1.2, 2.0;
  CHECK(problem.y_star(x) == loaded.y_star(x));
  CHECK(problem.grad_phi(x) == loaded.grad_phi(x));
  CHECK(problem.phi(x) == loaded.phi(x));
  CHECK(problem.n_train() == loaded.n_train());

  auto oracle = make_synthetic_oracle(loaded);
  auto oracle0 = make_synthetic_oracle(problem);
  const Vector grad = oracle->grad_y_g(x, x, full_batch(loaded.n_train()));
  CHECK(grad == oracle0->grad_y_g(x, x, full_batch(problem.n_train())));
}

TEST_CASE("matrix-constructed problems have no sampling oracle") {
  const Matrix eye = Matrix::Identity(2, 2);
  const SyntheticProblem problem(eye, Vector::Zero(2), eye, Vector::Zero(2), 0.5);
  CHECK(!problem.has_data());
  CHECK_THROWS_AS(make_synthetic_oracle(problem), InvalidState);
}
