#pragma once

#include <vector>

#include "auq/problem.hpp"

namespace auq {

// Least-squares loss 1/2 |X u - y|^2.  Rows of X are samples.
class ElasticNetLoss final : public LossOracle {
 public:
  ElasticNetLoss(Matrix data, Vector targets);

  Eigen::Index dim() const override { return data_.cols(); }
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hess_vec(const Vector& u, const Vector& x) const override;
  bool is_quadratic() const override { return true; }

  const Matrix& data() const { return data_; }
  const Vector& targets() const { return targets_; }
  // Right-hand side X'y of the normal equations; cached for the solver.
  const Vector& normal_rhs() const { return normal_rhs_; }

 private:
  Matrix data_;
  Vector targets_;
  Vector normal_rhs_;
};

// Multinomial logistic loss over `classes` classes.  Parameters are a
// (features x classes) matrix flattened column by column; rows of the data
// matrix are samples, labels are class indices in [0, classes).
// Log-probabilities use max-subtraction, so values stay finite for any input.
class MultinomialLoss final : public LossOracle {
 public:
  MultinomialLoss(Matrix data, std::vector<int> labels, int classes);

  Eigen::Index dim() const override { return data_.cols() * classes_; }
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hess_vec(const Vector& u, const Vector& x) const override;

  int classes() const { return classes_; }
  Eigen::Index features() const { return data_.cols(); }

 private:
  // Row-wise softmax of X U; also returns per-row log-normalizers.
  Matrix probabilities(const Vector& u, Vector* log_norm) const;

  Matrix data_;
  std::vector<int> labels_;
  int classes_;
};

// Smoothed hinge loss: mean over samples of 1/2 (z + sqrt(eps^2 + z^2)) with
// z = 1 - y * (u . x).  Columns of the data matrix are samples; labels are
// +-1.  eps > 0 keeps the loss twice differentiable.
class SmoothedSvmLoss final : public LossOracle {
 public:
  SmoothedSvmLoss(Matrix samples, Vector labels, double eps = 1.0 / 5000.0);

  Eigen::Index dim() const override { return samples_.rows(); }
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hess_vec(const Vector& u, const Vector& x) const override;

 private:
  Matrix samples_;  // dim x count
  Vector labels_;
  double eps_;
};

// Exact minimizer of  g(v) + 1/2 sum_j |v - t_j|^2_{W_j}  for the supported
// regularizers.  Separable per coordinate: with s_i = sum_j w_ji and
// m_i = sum_j w_ji t_ji, elastic net gives soft-threshold(m_i, l1)/(l2 + s_i)
// and tikhonov gives m_i/(scale + s_i).
Vector weighted_prox(const ProxRegularizer& reg, const std::vector<Vector>& targets,
                     const std::vector<DiagonalWeight>& weights);

}  // namespace auq
