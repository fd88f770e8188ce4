#include "bilo/synthetic/synthetic.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace bilo {

namespace {

void write_matrix(std::ostream& os, const char* name, const Matrix& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << m(i, j) << (j + 1 == m.cols() ? '\n' : ' ');
    }
  }
}

Matrix read_matrix(std::istream& is, const std::string& expected_name) {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> name >> rows >> cols) || name != expected_name || rows < 0 || cols < 0) {
    throw IoError("synthetic load: malformed section, expected '" + expected_name + "'");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(is >> m(i, j))) throw IoError("synthetic load: truncated matrix " + expected_name);
    }
  }
  return m;
}

void write_vector(std::ostream& os, const char* name, const Vector& v) {
  write_matrix(os, name, Matrix(v.transpose()));
}

Vector read_vector(std::istream& is, const std::string& expected_name) {
  Matrix m = read_matrix(is, expected_name);
  if (m.rows() != 1) throw IoError("synthetic load: expected a single row for " + expected_name);
  return Vector(m.row(0));
}

}  // namespace

SyntheticProblem SyntheticProblem::generate(RngStream& rng, const Vector& w0,
                                            const SyntheticGenParams& params) {
  const Eigen::Index p = w0.size();
  if (p < 2) {
    throw InvalidArgument("synthetic generate: dimension must be >= 2 (last coordinate is the constant feature)");
  }
  if (params.n_train == 0 || params.n_val == 0) {
    throw InvalidArgument("synthetic generate: dataset sizes must be positive");
  }
  if (params.reg <= 0.0) {
    throw InvalidArgument("synthetic generate: regularization weight must be positive");
  }

  const std::size_t n_total = params.n_train + params.n_val;
  Matrix features(n_total, p);
  Vector targets(n_total);
  for (std::size_t i = 0; i < n_total; ++i) {
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
      features(static_cast<Eigen::Index>(i), j) = rng.next_normal(0.0, params.feature_std);
    }
    features(static_cast<Eigen::Index>(i), p - 1) = 1.0;
    features.row(static_cast<Eigen::Index>(i)) *= params.feature_scale;
    targets(static_cast<Eigen::Index>(i)) =
        w0.dot(features.row(static_cast<Eigen::Index>(i))) + rng.next_normal(0.0, params.noise_std);
  }

  SyntheticProblem problem;
  problem.w0_ = w0;
  problem.reg_ = params.reg;
  problem.features_train_ = features.topRows(static_cast<Eigen::Index>(params.n_train));
  problem.targets_train_ = targets.head(static_cast<Eigen::Index>(params.n_train));
  problem.features_val_ = features.bottomRows(static_cast<Eigen::Index>(params.n_val));
  problem.targets_val_ = targets.tail(static_cast<Eigen::Index>(params.n_val));

  const double inv_tr = 1.0 / static_cast<double>(params.n_train);
  const double inv_val = 1.0 / static_cast<double>(params.n_val);
  problem.a_train_ = inv_tr * (problem.features_train_.transpose() * problem.features_train_);
  problem.b_train_ = inv_tr * (problem.features_train_.transpose() * problem.targets_train_);
  problem.a_val_ = inv_val * (problem.features_val_.transpose() * problem.features_val_);
  problem.b_val_ = inv_val * (problem.features_val_.transpose() * problem.targets_val_);
  problem.mean_v2_train_ = inv_tr * problem.targets_train_.squaredNorm();
  problem.mean_v2_val_ = inv_val * problem.targets_val_.squaredNorm();
  problem.finalize();
  return problem;
}

SyntheticProblem::SyntheticProblem(Matrix a_train, Vector b_train, Matrix a_val, Vector b_val,
                                   double reg, double mean_v2_val, double mean_v2_train)
    : a_train_(std::move(a_train)),
      a_val_(std::move(a_val)),
      b_train_(std::move(b_train)),
      b_val_(std::move(b_val)),
      reg_(reg),
      mean_v2_val_(mean_v2_val),
      mean_v2_train_(mean_v2_train) {
  if (a_train_.rows() != a_train_.cols() || a_val_.rows() != a_val_.cols() ||
      a_train_.rows() != b_train_.size() || a_val_.rows() != b_val_.size() ||
      a_train_.rows() != a_val_.rows()) {
    throw InvalidArgument("synthetic: inconsistent matrix/vector dimensions");
  }
  if (reg_ <= 0.0) throw InvalidArgument("synthetic: regularization weight must be positive");
  finalize();
}

void SyntheticProblem::finalize() {
  Matrix shifted = a_train_;
  shifted.diagonal().array() += reg_;
  ll_solver_.compute(shifted);
  if (ll_solver_.info() != Eigen::Success) {
    throw NumericalError("synthetic: A_tr + r I is not positive definite");
  }
}

Vector SyntheticProblem::y_star(const Vector& x) const {
  if (x.size() != dim()) throw InvalidArgument("y_star: dimension mismatch");
  Vector out = ll_solver_.solve(b_train_ + reg_ * x);
  ensure_finite(out, "y_star");
  return out;
}

Vector SyntheticProblem::grad_phi(const Vector& x) const {
  const Vector ys = y_star(x);
  Vector out = reg_ * ll_solver_.solve(a_val_ * ys - b_val_) + 3.0 * x.norm() * x;
  ensure_finite(out, "grad_phi");
  return out;
}

double SyntheticProblem::phi(const Vector& x) const { return f_value(x, y_star(x)); }

double SyntheticProblem::f_value(const Vector& x, const Vector& y) const {
  const double ls = 0.5 * (y.dot(a_val_ * y) - 2.0 * b_val_.dot(y) + mean_v2_val_);
  const double nx = x.norm();
  return ls + nx * nx * nx;
}

double SyntheticProblem::g_value(const Vector& x, const Vector& y) const {
  const double ls = 0.5 * (y.dot(a_train_ * y) - 2.0 * b_train_.dot(y) + mean_v2_train_);
  return ls + 0.5 * reg_ * (y - x).squaredNorm();
}

std::shared_ptr<const Vector> SyntheticProblem::train_spectrum() const {
  return a_train_eigenvalues_.get([this] {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a_train_, Eigen::EigenvaluesOnly);
    return Vector(es.eigenvalues());
  });
}

std::shared_ptr<const Vector> SyntheticProblem::val_spectrum() const {
  return a_val_eigenvalues_.get([this] {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a_val_, Eigen::EigenvaluesOnly);
    return Vector(es.eigenvalues());
  });
}

double SyntheticProblem::lambda_min_a_train() const { return train_spectrum()->minCoeff(); }
double SyntheticProblem::lambda_max_a_train() const { return train_spectrum()->maxCoeff(); }
double SyntheticProblem::lambda_max_a_val() const { return val_spectrum()->maxCoeff(); }

double SyntheticProblem::ll_condition_number() const {
  return (lambda_max_a_train() + reg_) / (lambda_min_a_train() + reg_);
}

void SyntheticProblem::save(std::ostream& os) const {
  os << "bilo-synthetic 1\n";
  os.precision(17);
  os << "reg " << reg_ << '\n';
  os << "mean_v2_val " << mean_v2_val_ << '\n';
  os << "mean_v2_train " << mean_v2_train_ << '\n';
  write_vector(os, "w0", w0_.size() > 0 ? w0_ : Vector::Zero(dim()));
  write_matrix(os, "features_train", features_train_);
  write_vector(os, "targets_train", targets_train_);
  write_matrix(os, "features_val", features_val_);
  write_vector(os, "targets_val", targets_val_);
  write_matrix(os, "a_train", a_train_);
  write_vector(os, "b_train", b_train_);
  write_matrix(os, "a_val", a_val_);
  write_vector(os, "b_val", b_val_);
  if (!os) throw IoError("synthetic save: write failed");
}

SyntheticProblem SyntheticProblem::load(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "bilo-synthetic" || version != 1) {
    throw IoError("synthetic load: unrecognized header");
  }
  SyntheticProblem problem;
  std::string key;
  auto read_scalar = [&](const char* expected, double& out) {
    if (!(is >> key >> out) || key != expected) {
      throw IoError(std::string("synthetic load: expected scalar '") + expected + "'");
    }
  };
  read_scalar("reg", problem.reg_);
  read_scalar("mean_v2_val", problem.mean_v2_val_);
  read_scalar("mean_v2_train", problem.mean_v2_train_);
  problem.w0_ = read_vector(is, "w0");
  problem.features_train_ = read_matrix(is, "features_train");
  problem.targets_train_ = read_vector(is, "targets_train");
  problem.features_val_ = read_matrix(is, "features_val");
  problem.targets_val_ = read_vector(is, "targets_val");
  problem.a_train_ = read_matrix(is, "a_train");
  problem.b_train_ = read_vector(is, "b_train");
  problem.a_val_ = read_matrix(is, "a_val");
  problem.b_val_ = read_vector(is, "b_val");
  problem.finalize();
  return problem;
}

namespace {

class SyntheticOracle final : public BilevelOracle {
 public:
  explicit SyntheticOracle(const SyntheticProblem& problem) : problem_(problem) {
    if (!problem.has_data()) {
      throw InvalidState("synthetic oracle requires per-sample data (use generate or load)");
    }
  }

  Eigen::Index dim_x() const override { return problem_.dim(); }
  Eigen::Index dim_y() const override { return problem_.dim(); }
  std::size_t num_upper_samples() const override { return problem_.n_val(); }
  std::size_t num_lower_samples() const override { return problem_.n_train(); }

 protected:
  // The cube-norm term of f is deterministic and attached to every sample, so
  // batched means stay unbiased for grad_x f.
  Vector grad_x_f_impl(const Vector& x, const Vector&, const BatchSpec&) override {
    return 3.0 * x.norm() * x;
  }

  Vector grad_y_f_impl(const Vector&, const Vector& y, const BatchSpec& batch) override {
    return residual_gradient(problem_.features_val(), problem_.targets_val(), y, batch);
  }

  Vector grad_y_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch) override {
    Vector out = residual_gradient(problem_.features_train(), problem_.targets_train(), y, batch);
    out.noalias() += problem_.reg() * (y - x);
    return out;
  }

  Vector hvp_yy_g_impl(const Vector&, const Vector&, const BatchSpec& batch,
                       const Vector& v) override {
    const Matrix& u = problem_.features_train();
    Vector out = Vector::Zero(v.size());
    for (const auto idx : batch.indices) {
      const auto row = u.row(static_cast<Eigen::Index>(idx));
      out.noalias() += row.dot(v) * row.transpose();
    }
    out /= static_cast<double>(batch.size());
    out.noalias() += problem_.reg() * v;
    return out;
  }

  Vector jvp_xy_g_impl(const Vector&, const Vector&, const BatchSpec&, const Vector& v) override {
    return -problem_.reg() * v;
  }

 private:
  static Vector residual_gradient(const Matrix& u, const Vector& targets, const Vector& y,
                                  const BatchSpec& batch) {
    if (batch.size() == 0) throw InvalidArgument("oracle: empty batch");
    Vector out = Vector::Zero(y.size());
    for (const auto idx : batch.indices) {
      const auto row = u.row(static_cast<Eigen::Index>(idx));
      out.noalias() += (row.dot(y) - targets(static_cast<Eigen::Index>(idx))) * row.transpose();
    }
    return out / static_cast<double>(batch.size());
  }

  const SyntheticProblem& problem_;
};

}  // namespace

std::unique_ptr<BilevelOracle> make_synthetic_oracle(const SyntheticProblem& problem) {
  return std::make_unique<SyntheticOracle>(problem);
}

}  // namespace bilo
