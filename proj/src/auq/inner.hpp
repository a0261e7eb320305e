#pragma once

#include <functional>

#include "auq/problem.hpp"

namespace auq {

struct InnerSettings {
  double tolerance = 1e-8;  // target gradient norm
  int max_iterations = 200;
  int memory = 10;  // quasi-Newton history length
};

struct InnerResult {
  Vector x;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Smooth objective handle: fills grad and returns the value.
using SmoothObjective = std::function<double(const Vector&, Vector&)>;

// Conjugate gradients for (H + W) x = rhs with H given by matrix-vector
// products (H constant and positive semidefinite, W positive diagonal).
// Stops when the residual norm drops to settings.tolerance; the iteration cap
// is max(settings.max_iterations, n).
InnerResult conjugate_gradient(const std::function<Vector(const Vector&)>& hess,
                               const DiagonalWeight& w, const Vector& rhs,
                               const Vector& x0, const InnerSettings& settings);

// Limited-memory BFGS with a strong Wolfe line search (c1 = 1e-4, c2 = 0.9).
// Stops when the gradient norm reaches settings.tolerance.
InnerResult minimize_lbfgs(const SmoothObjective& objective, const Vector& x0,
                           const InnerSettings& settings);

}  // namespace auq
