#pragma once

#include <cstdint>
#include <functional>

#include "auq/problem.hpp"

namespace auq {

// Top eigenpairs of a symmetric operator: values nonincreasing, vectors
// orthonormal columns.
struct LowRankEig {
  Matrix vectors;  // n x r
  Vector values;   // r
};

using LinearOperator = std::function<Vector(const Vector&)>;

// Ritz approximation of the r largest eigenpairs of a symmetric n x n
// operator given only by matrix-vector products.  Runs Lanczos with full
// reorthogonalization for min(n, max(2r, r + 10)) steps from a seeded random
// unit vector.  On breakdown (invariant subspace found) the basis is extended
// with a fresh random direction orthogonal to everything so far, so the
// requested rank is still delivered; for r = n this makes the Ritz values the
// exact spectrum up to roundoff.  rank larger than n is clamped to n.
LowRankEig lanczos_top_r(const LinearOperator& op, Eigen::Index n, int rank,
                         std::uint64_t seed);

// diag(V D V'): entry i is sum_l values[l] * vectors(i, l)^2.  Never forms
// the n x n matrix.
Vector low_rank_diag(const LowRankEig& eig);

}  // namespace auq
