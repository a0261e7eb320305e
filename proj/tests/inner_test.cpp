#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "auq/inner.hpp"
#include "auq/losses.hpp"
#include "doctest.h"
#include "test_support.hpp"

using auq::DiagonalWeight;
using auq::InnerResult;
using auq::InnerSettings;
using auq::Matrix;
using auq::Vector;

TEST_CASE("conjugate gradient matches a dense direct solve") {
  std::mt19937 gen(2);
  std::normal_distribution<double> dist;
  Eigen::Index n = 20;
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = dist(gen);
  Matrix H = A.transpose() * A;  // PSD
  Vector wdiag(n);
  for (Eigen::Index i = 0; i < n; ++i) wdiag[i] = 0.5 + static_cast<double>(i % 3);
  DiagonalWeight w{wdiag};
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = dist(gen);

  InnerSettings settings;
  settings.tolerance = 1e-10;
  InnerResult res = auq::conjugate_gradient(
      [&](const Vector& x) -> Vector { return H * x; }, w, rhs, Vector::Zero(n),
      settings);

  Matrix full = H + Matrix(wdiag.asDiagonal());
  Vector direct = full.ldlt().solve(rhs);
  CHECK(res.converged);
  CHECK((res.x - direct).norm() < 1e-8);
  CHECK(res.grad_norm <= settings.tolerance);
}

TEST_CASE("conjugate gradient accepts an exact warm start") {
  Eigen::Index n = 8;
  DiagonalWeight w = DiagonalWeight::constant(n, 2.0);
  Vector rhs = Vector::Ones(n);
  // H = 0: solution is rhs / 2.
  InnerSettings settings;
  settings.tolerance = 1e-12;
  InnerResult res = auq::conjugate_gradient(
      [](const Vector& x) -> Vector { return Vector::Zero(x.size()); }, w, rhs,
      Vector::Constant(n, 0.5), settings);
  CHECK(res.converged);
  CHECK(res.iterations == 0);
}

TEST_CASE("lbfgs minimizes a convex quadratic to tolerance") {
  std::mt19937 gen(6);
  std::normal_distribution<double> dist;
  Eigen::Index n = 10;
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = dist(gen);
  Matrix H = A.transpose() * A + Matrix::Identity(n, n);
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = dist(gen);

  auq::SmoothObjective obj = [&](const Vector& x, Vector& g) {
    g = H * x - b;
    return 0.5 * x.dot(H * x) - b.dot(x);
  };
  InnerSettings settings;
  settings.tolerance = 1e-9;
  InnerResult res = auq::minimize_lbfgs(obj, Vector::Zero(n), settings);
  Vector direct = H.ldlt().solve(b);
  CHECK(res.converged);
  CHECK(res.grad_norm <= settings.tolerance);
  CHECK((res.x - direct).norm() < 1e-7);
}

TEST_CASE("lbfgs solves rosenbrock from the classic start") {
  auq::SmoothObjective obj = [](const Vector& x, Vector& g) {
    double a = 1.0 - x[0];
    double b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  InnerSettings settings;
  settings.tolerance = 1e-8;
  settings.max_iterations = 200;
  InnerResult res = auq::minimize_lbfgs(obj, x0, settings);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lbfgs reports budget exhaustion honestly") {
  auq::SmoothObjective obj = [](const Vector& x, Vector& g) {
    double a = 1.0 - x[0];
    double b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  InnerSettings settings;
  settings.tolerance = 1e-12;
  settings.max_iterations = 3;
  InnerResult res = auq::minimize_lbfgs(obj, x0, settings);
  CHECK(!res.converged);
  CHECK(res.iterations <= 3);
}

TEST_CASE("lbfgs rejects a non-finite start") {
  auq::SmoothObjective obj = [](const Vector& x, Vector& g) {
    g = x;
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(auq::minimize_lbfgs(obj, Vector::Zero(2), InnerSettings{}),
                  auq::Error);
}

TEST_CASE("lbfgs drives a smoothed svm local objective to stationarity") {
  std::mt19937 gen(9);
  std::normal_distribution<double> dist;
  Eigen::Index dim = 6, count = 30;
  Matrix X(dim, count);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = dist(gen);
  Vector y(count);
  for (Eigen::Index i = 0; i < count; ++i) y[i] = (i % 2 == 0) ? 1.0 : -1.0;
  auq::SmoothedSvmLoss loss(X, y);

  Vector v = Vector::Zero(dim), lambda = Vector::Zero(dim);
  DiagonalWeight w = DiagonalWeight::constant(dim, 0.7);
  auq::SmoothObjective obj = [&](const Vector& u, Vector& g) {
    Vector pull = u - v;
    g = loss.gradient(u) + w.apply(pull) - lambda;
    return loss.value(u) + 0.5 * pull.cwiseProduct(w.d).dot(pull) - lambda.dot(pull);
  };
  InnerSettings settings;
  settings.tolerance = 1e-9;
  InnerResult res = auq::minimize_lbfgs(obj, Vector::Zero(dim), settings);
  CHECK(res.converged);
  Vector g(dim);
  obj(res.x, g);
  CHECK(g.norm() <= 1e-9);
}
