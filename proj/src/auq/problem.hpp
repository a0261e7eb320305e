#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "auq/error.hpp"

namespace auq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Positive diagonal weight matrix, stored by its diagonal.
struct DiagonalWeight {
  Vector d;

  DiagonalWeight() = default;
  explicit DiagonalWeight(Vector diag);  // rejects non-positive entries
  static DiagonalWeight constant(Eigen::Index n, double value);

  Eigen::Index size() const { return d.size(); }
  Vector apply(const Vector& x) const { return d.cwiseProduct(x); }       // W x
  Vector apply_inv(const Vector& x) const { return x.cwiseQuotient(d); }  // W^-1 x
};

// sqrt(x' W x); zero vector gives 0 for any positive W.
double weighted_norm(const Vector& x, const DiagonalWeight& w);

// Smooth per-worker loss term.  Implementations expose the objective, its
// gradient, and Hessian-vector products; the Hessian itself is never formed.
class LossOracle {
 public:
  virtual ~LossOracle() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vector& u) const = 0;
  virtual Vector gradient(const Vector& u) const = 0;
  // Action of the Hessian at u on x.
  virtual Vector hess_vec(const Vector& u, const Vector& x) const = 0;
  // Quadratic losses have a constant Hessian; the local subproblem then has a
  // dedicated linear-system path instead of the quasi-Newton loop.
  virtual bool is_quadratic() const { return false; }
};

// Separable regularizer with a closed-form weighted proximal step
// (see weighted_prox in losses.hpp).
struct ProxRegularizer {
  enum class Kind { elastic_net, tikhonov };
  Kind kind = Kind::tikhonov;
  double l1 = 0.0;     // elastic net: l1 |v| + l2/2 v^2
  double l2 = 0.0;
  double scale = 1.0;  // tikhonov: scale/2 v^2

  static ProxRegularizer elastic_net(double l1, double l2);
  static ProxRegularizer tikhonov(double scale);
  double value(const Vector& v) const;
};

// N workers sharing one consensus variable of dimension dim().
struct ConsensusProblem {
  std::vector<std::shared_ptr<const LossOracle>> losses;
  ProxRegularizer regularizer;

  int workers() const { return static_cast<int>(losses.size()); }
  Eigen::Index dim() const;
  void validate() const;  // at least one worker, equal dims, non-null oracles
};

// One iterate of the consensus scheme.
struct SolverState {
  std::vector<Vector> u;
  Vector v;
  std::vector<Vector> lambda;
  std::vector<DiagonalWeight> weights;
  int iteration = 0;
};

// Finite-difference / algebraic audit of a LossOracle at a point.
struct OracleReport {
  double max_gradient_error = 0.0;    // directional derivative vs central FD
  double max_linearity_defect = 0.0;  // hess_vec(a x + b z) vs combination
  double max_symmetry_defect = 0.0;   // x'Hz vs z'Hx
};

// Probes `trials` random directions at u.  Central differences use step
// 1e-6 * (1 + |u|_inf).  Non-finite oracle output raises an oracle error.
OracleReport check_oracle(const LossOracle& loss, const Vector& u, int trials,
                          std::uint64_t seed);

}  // namespace auq
