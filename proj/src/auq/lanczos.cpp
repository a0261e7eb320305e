#include "auq/lanczos.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "auq/rng.hpp"

namespace auq {

LowRankEig lanczos_top_r(const LinearOperator& op, Eigen::Index n, int rank,
                         std::uint64_t seed) {
  require(n > 0, ErrorKind::argument, "lanczos: dimension must be positive");
  require(rank >= 1, ErrorKind::argument, "lanczos: rank must be at least 1");
  Eigen::Index r = std::min<Eigen::Index>(rank, n);  // r > n carries no extra pairs
  Eigen::Index budget = std::min(n, std::max(2 * r, r + 10));

  Matrix Q(n, budget);
  Vector alpha(budget), beta(budget);
  alpha.setZero();
  beta.setZero();

  Rng rng(seed);
  Vector q = rng.unit_vector(n);
  double scale = 1.0;  // running magnitude estimate for breakdown detection
  Eigen::Index steps = 0;

  for (Eigen::Index i = 0; i < budget; ++i) {
    Q.col(i) = q;
    steps = i + 1;
    Vector w = op(q);
    require(w.size() == n, ErrorKind::argument, "lanczos: operator changed dimension");
    if (!w.allFinite()) fail(ErrorKind::oracle, "lanczos: operator output not finite");
    alpha[i] = q.dot(w);
    scale = std::max(scale, std::abs(alpha[i]));
    w -= alpha[i] * q;
    if (i > 0 && beta[i - 1] != 0.0) w -= beta[i - 1] * Q.col(i - 1);
    // Full reorthogonalization, two passes.
    for (int pass = 0; pass < 2; ++pass)
      w -= Q.leftCols(i + 1) * (Q.leftCols(i + 1).transpose() * w);
    if (i + 1 == budget) break;

    double bnorm = w.norm();
    double breakdown = 1e-13 * static_cast<double>(n) * scale;
    if (bnorm > breakdown) {
      beta[i] = bnorm;
      scale = std::max(scale, bnorm);
      q = w / bnorm;
      continue;
    }
    // Invariant subspace found.  Continue from a fresh random direction
    // orthogonal to the basis so far (the tridiagonal matrix gets a zero
    // coupling here); this keeps delivering pairs up to the requested rank.
    bool restarted = false;
    for (int attempt = 0; attempt < 16 && !restarted; ++attempt) {
      Vector f = rng.gaussian_vector(n);
      for (int pass = 0; pass < 2; ++pass)
        f -= Q.leftCols(i + 1) * (Q.leftCols(i + 1).transpose() * f);
      double fn = f.norm();
      if (fn > 1e-8) {
        q = f / fn;
        beta[i] = 0.0;
        restarted = true;
      }
    }
    if (!restarted) break;  // basis numerically exhausted; use what we have
  }

  // Eigen-decompose the (possibly block) tridiagonal Rayleigh quotient.
  Matrix T = Matrix::Zero(steps, steps);
  for (Eigen::Index i = 0; i < steps; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < steps) {
      T(i, i + 1) = beta[i];
      T(i + 1, i) = beta[i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  require(es.info() == Eigen::Success, ErrorKind::solver,
          "lanczos: tridiagonal eigensolver failed");

  Eigen::Index have = std::min(r, steps);
  LowRankEig out;
  out.values.resize(r);
  out.vectors.resize(n, r);
  // Eigen returns ascending order; emit the top pairs in descending order.
  for (Eigen::Index l = 0; l < have; ++l) {
    Eigen::Index src = steps - 1 - l;
    out.values[l] = es.eigenvalues()[src];
    out.vectors.col(l) = Q.leftCols(steps) * es.eigenvectors().col(src);
  }
  // Terminal fallback: if the basis collapsed before r columns (only possible
  // when random restarts failed repeatedly), pad with the smallest Ritz value
  // and zero directions.
  for (Eigen::Index l = have; l < r; ++l) {
    out.values[l] = have > 0 ? out.values[have - 1] : 0.0;
    out.vectors.col(l).setZero();
  }
  return out;
}

Vector low_rank_diag(const LowRankEig& eig) {
  require(eig.vectors.cols() == eig.values.size(), ErrorKind::argument,
          "low_rank_diag: shape mismatch");
  return eig.vectors.array().square().matrix() * eig.values;
}

}  // namespace auq
