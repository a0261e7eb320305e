#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "auq/problem.hpp"

namespace auq {

// Shrinking bracket the uncertainty weights are mapped into.  Starts at
// [a1, b1]; the lower end is fixed while the upper end contracts toward it:
// after the update at iteration k the ratio is
//   b/a = (b1/a1) / (k+1)^2 + 1 - 1/(k+1)^2,
// so b/a -> 1 and the weights freeze asymptotically.
struct RestrictionInterval {
  double initial_low = 0.1;
  double initial_high = 1.0;
  double low = 0.1;
  double high = 1.0;
  int index = 1;  // schedule position (1 = initial bracket)

  static RestrictionInterval from_initial(double a1, double b1);
};

// Bracket update at iteration k (expects k == interval.index).
RestrictionInterval interval_update(const RestrictionInterval& interval, int k);

// Bound on element-wise weight ratios between consecutive iterations:
// consecutive weights satisfy 1/(1 + c(k)) <= w^k / w^{k-1} <= 1 + c(k) with
//   c(1) = b1/a1 - 1,   c(k) = (b1/a1 - 1) / (k-1)^2  for k >= 2,
// whose sum is at most (b1/a1 - 1)(1 + pi^2/6).
struct CSequence {
  double initial_low = 0.1;
  double initial_high = 1.0;
  double value(int k) const;
  double partial_sum_bound() const;
};

// Element-wise affine map of x onto [a, b]: the smallest entry lands on a,
// the largest on b.  A constant vector maps to the midpoint (a + b)/2.
Vector affine_restrict(const Vector& x, double a, double b);

struct UqWeightOptions {
  int rank = 5;
  std::uint64_t seed = 0;
  int threads = 0;
};

// Per-worker uncertainty weights: the diagonal of a rank-r eigenvalue sketch
// of each worker's Hessian at its current iterate, mapped into the bracket.
std::vector<DiagonalWeight> uq_weights(
    const std::vector<std::shared_ptr<const LossOracle>>& losses,
    const std::vector<Vector>& u, const RestrictionInterval& interval,
    const UqWeightOptions& options);

// Checks the consecutive-ratio bound above for every coordinate of every
// worker (slack 1e-12 on both sides).
bool audit_weight_ratios(const std::vector<DiagonalWeight>& previous,
                         const std::vector<DiagonalWeight>& current, double c);

// Scalar penalty update driven by the primal/dual residual balance:
// grow by tau when |r| > mu |s|, shrink by tau when |s| > mu |r|.
struct ResidualBalancingConfig {
  double mu = 10.0;
  double tau = 2.0;
};

double residual_balance_update(double rho, double r_norm, double s_norm,
                               const ResidualBalancingConfig& cfg);

// Per-worker spectral (Barzilai-Borwein style) penalty adaptation with a
// bounded-relative-change safeguard.
struct SpectralPenaltyConfig {
  double eps_cor = 0.2;   // minimum correlation to trust a curvature estimate
  double safeguard = 1e10;  // relative change at iteration k capped by 1 + safeguard/k^2
  int lookback = 2;       // curvature secants span this many iterations
};

class SpectralPenaltyState {
 public:
  SpectralPenaltyState(int workers, double rho0, SpectralPenaltyConfig cfg);

  // Record iteration k's iterates.  lambda_hat is the iteration's
  // intermediate multiplier, evaluated against the previous consensus point:
  //   lambda_hat_j = lambda_j^{k-1} + W_j (v^{k-1} - u_j^k),
  // which equals grad f_j(u_j^k) at the local subproblem optimum.
  void record(int k, const std::vector<Vector>& u, const Vector& v,
              const std::vector<Vector>& lambda,
              const std::vector<Vector>& lambda_hat);

  // Spectral update at iteration k using the snapshot from k - lookback.
  // No-op until both snapshots exist.
  void update(int k);

  const std::vector<double>& penalties() const { return rho_; }

 private:
  struct Snapshot {
    int k = -1;
    std::vector<Vector> u, lambda, lambda_hat;
    Vector v;
  };

  SpectralPenaltyConfig cfg_;
  std::vector<double> rho_;
  std::vector<Snapshot> history_;  // ring over iteration index
};

}  // namespace auq
