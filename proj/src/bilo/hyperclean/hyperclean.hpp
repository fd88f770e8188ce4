#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "bilo/core/oracle.hpp"
#include "bilo/core/rng.hpp"
#include "bilo/core/types.hpp"

namespace bilo {

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct BlobGenParams {
  std::size_t n_test = 0;        // 0 -> same as n_val
  double centroid_std = 2.0;     // spread of the class centers
  double cluster_std = 1.0;      // within-class noise
  double ridge = 1e-3;
};

// Label reweighting on synthetic Gaussian blobs: x holds one logit per
// training sample, y a flattened C x d linear classifier trained with softmax
// cross-entropy weighted by sigmoid(x_i) plus a ridge term. A fraction of the
// training labels is replaced by uniform random labels; the corruption mask
// is recorded.
class HypercleanProblem {
 public:
  static HypercleanProblem generate(RngStream& rng, std::size_t n_train, std::size_t n_val,
                                    std::size_t dim, std::size_t num_classes,
                                    double corruption_prob, const BlobGenParams& extras = {});

  std::size_t n_train() const { return static_cast<std::size_t>(features_train_.rows()); }
  std::size_t n_val() const { return static_cast<std::size_t>(features_val_.rows()); }
  std::size_t n_test() const { return static_cast<std::size_t>(features_test_.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_train_.cols()); }
  std::size_t num_classes() const { return num_classes_; }
  Eigen::Index dim_x() const { return static_cast<Eigen::Index>(n_train()); }
  Eigen::Index dim_y() const {
    return static_cast<Eigen::Index>(num_classes_ * feature_dim());
  }
  double ridge() const { return ridge_; }
  double corruption_prob() const { return corruption_prob_; }

  const Matrix& features_train() const { return features_train_; }
  const Matrix& features_val() const { return features_val_; }
  const Matrix& features_test() const { return features_test_; }
  const std::vector<int>& labels_train() const { return labels_train_; }
  const std::vector<int>& labels_val() const { return labels_val_; }
  const std::vector<int>& labels_test() const { return labels_test_; }
  const std::vector<int>& clean_labels_train() const { return clean_labels_train_; }
  const std::vector<bool>& corruption_mask() const { return corruption_mask_; }

  // Per-sample softmax cross-entropy loss of the flattened classifier y.
  double sample_loss(const Vector& y, const Matrix& features, int label, Eigen::Index row) const;
  // Full-batch objective values.
  double ul_value(const Vector& y) const;
  double ll_value(const Vector& x, const Vector& y) const;

  // (test accuracy, macro F1) of the argmax classifier; ties break toward the
  // lowest class index.
  std::pair<double, double> eval_metrics(const Vector& y) const;

  void save(std::ostream& os) const;
  static HypercleanProblem load(std::istream& is);

 private:
  std::size_t num_classes_ = 0;
  double ridge_ = 1e-3;
  double corruption_prob_ = 0.3;
  Matrix features_train_, features_val_, features_test_;
  std::vector<int> labels_train_, labels_val_, labels_test_;
  std::vector<int> clean_labels_train_;
  std::vector<bool> corruption_mask_;
};

std::unique_ptr<BilevelOracle> make_hyperclean_oracle(const HypercleanProblem& problem);

// Full-batch implicit-differentiation proxy for the trace metrics: a fixed
// number of lower-level gradient steps from y_start, then a direct solve of
// the linear system on the materialized Hessian. Uses its own uncounted
// oracle.
std::pair<double, double> hyperclean_phi_proxy(const HypercleanProblem& problem, const Vector& x,
                                               const Vector& y_start, int ll_steps = 200);

}  // namespace bilo
