#include "bilo/hyperclean/hyperclean.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace bilo {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                    Eigen::RowMajor>>;

RowMajorMap as_classifier(const Vector& y, std::size_t num_classes, std::size_t dim) {
  return RowMajorMap(y.data(), static_cast<Eigen::Index>(num_classes),
                     static_cast<Eigen::Index>(dim));
}

// Stable softmax of W u.
Vector class_probabilities(const Vector& y, std::size_t num_classes, std::size_t dim,
                           const Eigen::Ref<const Eigen::RowVectorXd>& u) {
  Vector z = as_classifier(y, num_classes, dim) * u.transpose();
  z.array() -= z.maxCoeff();
  Vector p = z.array().exp();
  p /= p.sum();
  return p;
}

void write_features(std::ostream& os, const char* name, const Matrix& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << m(i, j) << (j + 1 == m.cols() ? '\n' : ' ');
    }
  }
}

Matrix read_features(std::istream& is, const std::string& expected) {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> name >> rows >> cols) || name != expected) {
    throw IoError("hyperclean load: malformed section, expected '" + expected + "'");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(is >> m(i, j))) throw IoError("hyperclean load: truncated matrix " + expected);
    }
  }
  return m;
}

void write_ints(std::ostream& os, const char* name, const std::vector<int>& values) {
  os << name << ' ' << values.size() << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << values[i] << (i + 1 == values.size() ? '\n' : ' ');
  }
  if (values.empty()) os << '\n';
}

std::vector<int> read_ints(std::istream& is, const std::string& expected) {
  std::string name;
  std::size_t count = 0;
  if (!(is >> name >> count) || name != expected) {
    throw IoError("hyperclean load: malformed section, expected '" + expected + "'");
  }
  std::vector<int> values(count);
  for (auto& v : values) {
    if (!(is >> v)) throw IoError("hyperclean load: truncated section " + expected);
  }
  return values;
}

}  // namespace

HypercleanProblem HypercleanProblem::generate(RngStream& rng, std::size_t n_train,
                                              std::size_t n_val, std::size_t dim,
                                              std::size_t num_classes, double corruption_prob,
                                              const BlobGenParams& extras) {
  if (n_train < 1 || n_val < 1 || dim < 1 || num_classes < 1) {
    throw InvalidArgument("hyperclean generate: sizes must be >= 1");
  }
  if (corruption_prob < 0.0 || corruption_prob > 1.0) {
    throw InvalidArgument("hyperclean generate: corruption probability must be in [0, 1]");
  }
  const std::size_t n_test = extras.n_test > 0 ? extras.n_test : n_val;

  HypercleanProblem problem;
  problem.num_classes_ = num_classes;
  problem.ridge_ = extras.ridge;
  problem.corruption_prob_ = corruption_prob;

  Matrix centroids(static_cast<Eigen::Index>(num_classes), static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    for (Eigen::Index j = 0; j < centroids.cols(); ++j) {
      centroids(c, j) = rng.next_normal(0.0, extras.centroid_std);
    }
  }

  auto draw_split = [&](std::size_t n, Matrix& features, std::vector<int>& labels) {
    features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(i % num_classes);  // balanced classes
      labels[i] = label;
      for (Eigen::Index j = 0; j < features.cols(); ++j) {
        features(static_cast<Eigen::Index>(i), j) =
            centroids(label, j) + rng.next_normal(0.0, extras.cluster_std);
      }
    }
  };
  draw_split(n_train, problem.features_train_, problem.labels_train_);
  draw_split(n_val, problem.features_val_, problem.labels_val_);
  draw_split(n_test, problem.features_test_, problem.labels_test_);

  problem.clean_labels_train_ = problem.labels_train_;
  problem.corruption_mask_.assign(n_train, false);
  for (std::size_t i = 0; i < n_train; ++i) {
    if (rng.next_unit() < corruption_prob) {
      problem.corruption_mask_[i] = true;
      problem.labels_train_[i] = static_cast<int>(rng.next_index(num_classes));
    }
  }
  return problem;
}

double HypercleanProblem::sample_loss(const Vector& y, const Matrix& features, int label,
                                      Eigen::Index row) const {
  Vector z = as_classifier(y, num_classes_, feature_dim()) * features.row(row).transpose();
  const double zmax = z.maxCoeff();
  const double lse = zmax + std::log((z.array() - zmax).exp().sum());
  return lse - z(label);
}

double HypercleanProblem::ul_value(const Vector& y) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < features_val_.rows(); ++i) {
    acc += sample_loss(y, features_val_, labels_val_[static_cast<std::size_t>(i)], i);
  }
  return acc / static_cast<double>(n_val());
}

double HypercleanProblem::ll_value(const Vector& x, const Vector& y) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < features_train_.rows(); ++i) {
    acc += sigmoid(x(i)) * sample_loss(y, features_train_, labels_train_[static_cast<std::size_t>(i)], i);
  }
  return acc / static_cast<double>(n_train()) + ridge_ * y.squaredNorm();
}

std::pair<double, double> HypercleanProblem::eval_metrics(const Vector& y) const {
  if (n_test() == 0) throw InvalidState("eval_metrics: empty test set");
  const auto classifier = as_classifier(y, num_classes_, feature_dim());
  const std::size_t c_count = num_classes_;
  std::vector<std::int64_t> tp(c_count, 0), fp(c_count, 0), fn(c_count, 0);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < features_test_.rows(); ++i) {
    const Vector z = classifier * features_test_.row(i).transpose();
    int best = 0;
    for (int c = 1; c < static_cast<int>(c_count); ++c) {
      if (z(c) > z(best)) best = c;
    }
    const int truth = labels_test_[static_cast<std::size_t>(i)];
    if (best == truth) {
      ++correct;
      ++tp[static_cast<std::size_t>(best)];
    } else {
      ++fp[static_cast<std::size_t>(best)];
      ++fn[static_cast<std::size_t>(truth)];
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(n_test());
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < c_count; ++c) {
    const double denom_p = static_cast<double>(tp[c] + fp[c]);
    const double denom_r = static_cast<double>(tp[c] + fn[c]);
    const double precision = denom_p > 0.0 ? static_cast<double>(tp[c]) / denom_p : 0.0;
    const double recall = denom_r > 0.0 ? static_cast<double>(tp[c]) / denom_r : 0.0;
    f1_sum += (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return {accuracy, f1_sum / static_cast<double>(c_count)};
}

void HypercleanProblem::save(std::ostream& os) const {
  os << "bilo-hyperclean 1\n";
  os.precision(17);
  os << "num_classes " << num_classes_ << '\n';
  os << "ridge " << ridge_ << '\n';
  os << "corruption_prob " << corruption_prob_ << '\n';
  write_features(os, "features_train", features_train_);
  write_features(os, "features_val", features_val_);
  write_features(os, "features_test", features_test_);
  write_ints(os, "labels_train", labels_train_);
  write_ints(os, "labels_val", labels_val_);
  write_ints(os, "labels_test", labels_test_);
  write_ints(os, "clean_labels_train", clean_labels_train_);
  std::vector<int> mask(corruption_mask_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = corruption_mask_[i] ? 1 : 0;
  write_ints(os, "corruption_mask", mask);
  if (!os) throw IoError("hyperclean save: write failed");
}

HypercleanProblem HypercleanProblem::load(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "bilo-hyperclean" || version != 1) {
    throw IoError("hyperclean load: unrecognized header");
  }
  HypercleanProblem problem;
  std::string key;
  if (!(is >> key >> problem.num_classes_) || key != "num_classes") {
    throw IoError("hyperclean load: expected num_classes");
  }
  if (!(is >> key >> problem.ridge_) || key != "ridge") {
    throw IoError("hyperclean load: expected ridge");
  }
  if (!(is >> key >> problem.corruption_prob_) || key != "corruption_prob") {
    throw IoError("hyperclean load: expected corruption_prob");
  }
  problem.features_train_ = read_features(is, "features_train");
  problem.features_val_ = read_features(is, "features_val");
  problem.features_test_ = read_features(is, "features_test");
  problem.labels_train_ = read_ints(is, "labels_train");
  problem.labels_val_ = read_ints(is, "labels_val");
  problem.labels_test_ = read_ints(is, "labels_test");
  problem.clean_labels_train_ = read_ints(is, "clean_labels_train");
  const std::vector<int> mask = read_ints(is, "corruption_mask");
  problem.corruption_mask_.assign(mask.size(), false);
  for (std::size_t i = 0; i < mask.size(); ++i) problem.corruption_mask_[i] = mask[i] != 0;
  return problem;
}

namespace {

class HypercleanOracle final : public BilevelOracle {
 public:
  explicit HypercleanOracle(const HypercleanProblem& problem) : problem_(problem) {}

  Eigen::Index dim_x() const override { return problem_.dim_x(); }
  Eigen::Index dim_y() const override { return problem_.dim_y(); }
  std::size_t num_upper_samples() const override { return problem_.n_val(); }
  std::size_t num_lower_samples() const override { return problem_.n_train(); }

 protected:
  Vector grad_x_f_impl(const Vector&, const Vector&, const BatchSpec&) override {
    return Vector::Zero(dim_x());
  }

  Vector grad_y_f_impl(const Vector&, const Vector& y, const BatchSpec& batch) override {
    Vector out = Vector::Zero(dim_y());
    for (const auto idx : batch.indices) {
      out += ce_gradient(y, problem_.features_val(), problem_.labels_val(), idx);
    }
    return out / static_cast<double>(batch.size());
  }

  Vector grad_y_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch) override {
    Vector out = Vector::Zero(dim_y());
    for (const auto idx : batch.indices) {
      out += sigmoid(x(static_cast<Eigen::Index>(idx))) *
             ce_gradient(y, problem_.features_train(), problem_.labels_train(), idx);
    }
    out /= static_cast<double>(batch.size());
    out.noalias() += 2.0 * problem_.ridge() * y;
    return out;
  }

  Vector hvp_yy_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch,
                       const Vector& v) override {
    const std::size_t c_count = problem_.num_classes();
    const std::size_t dim = problem_.feature_dim();
    const auto value = RowMajorMap(v.data(), static_cast<Eigen::Index>(c_count),
                                   static_cast<Eigen::Index>(dim));
    Vector out = Vector::Zero(dim_y());
    auto out_mat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(out.data(),
                                                              static_cast<Eigen::Index>(c_count),
                                                              static_cast<Eigen::Index>(dim));
    for (const auto idx : batch.indices) {
      const auto u = problem_.features_train().row(static_cast<Eigen::Index>(idx));
      const Vector p = class_probabilities(y, c_count, dim, u);
      const Vector a = value * u.transpose();
      // (diag(p) - p p^T) a, applied matrix-free
      const Vector b = p.cwiseProduct(a) - p * p.dot(a);
      out_mat.noalias() += sigmoid(x(static_cast<Eigen::Index>(idx))) * (b * u);
    }
    out /= static_cast<double>(batch.size());
    out.noalias() += 2.0 * problem_.ridge() * v;
    return out;
  }

  Vector jvp_xy_g_impl(const Vector& x, const Vector& y, const BatchSpec& batch,
                       const Vector& v) override {
    Vector out = Vector::Zero(dim_x());
    for (const auto idx : batch.indices) {
      const auto i = static_cast<Eigen::Index>(idx);
      const double s = sigmoid(x(i));
      const Vector grad = ce_gradient(y, problem_.features_train(), problem_.labels_train(), idx);
      out(i) += s * (1.0 - s) * grad.dot(v);
    }
    return out / static_cast<double>(batch.size());
  }

 private:
  Vector ce_gradient(const Vector& y, const Matrix& features, const std::vector<int>& labels,
                     std::uint32_t idx) const {
    const std::size_t c_count = problem_.num_classes();
    const std::size_t dim = problem_.feature_dim();
    const auto u = features.row(static_cast<Eigen::Index>(idx));
    Vector p = class_probabilities(y, c_count, dim, u);
    p(labels[idx]) -= 1.0;
    Vector out(static_cast<Eigen::Index>(c_count * dim));
    auto out_mat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(out.data(),
                                                              static_cast<Eigen::Index>(c_count),
                                                              static_cast<Eigen::Index>(dim));
    out_mat.noalias() = p * u;
    return out;
  }

  const HypercleanProblem& problem_;
};

}  // namespace

std::unique_ptr<BilevelOracle> make_hyperclean_oracle(const HypercleanProblem& problem) {
  return std::make_unique<HypercleanOracle>(problem);
}

std::pair<double, double> hyperclean_phi_proxy(const HypercleanProblem& problem, const Vector& x,
                                               const Vector& y_start, int ll_steps) {
  auto oracle = make_hyperclean_oracle(problem);
  const BatchSpec train = full_batch(problem.n_train());
  const BatchSpec val = full_batch(problem.n_val());

  // Step size from the spectral bound of the weighted-softmax Hessian:
  // |H_i| <= |u_i|^2 / 2 per sample.
  double hess_bound = 0.0;
  for (Eigen::Index i = 0; i < problem.features_train().rows(); ++i) {
    hess_bound += sigmoid(x(i)) * 0.5 * problem.features_train().row(i).squaredNorm();
  }
  hess_bound = hess_bound / static_cast<double>(problem.n_train()) + 2.0 * problem.ridge();
  const double step = 1.0 / hess_bound;

  Vector y = y_start.size() == problem.dim_y() ? y_start : Vector::Zero(problem.dim_y());
  for (int t = 0; t < ll_steps; ++t) {
    y -= step * oracle->grad_y_g(x, y, train);
  }

  const Eigen::Index q = problem.dim_y();
  Matrix hess(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    hess.col(j) = oracle->hvp_yy_g(x, y, train, Vector::Unit(q, j));
  }
  const Vector rhs = oracle->grad_y_f(x, y, val);
  const Vector v = Eigen::LLT<Matrix>(hess).solve(rhs);
  const Vector grad = -oracle->jvp_xy_g(x, y, train, v);
  return {problem.ul_value(y), grad.norm()};
}

}  // namespace bilo
