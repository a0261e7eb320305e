#include "auq/problem.hpp"

#include <cmath>

#include "auq/rng.hpp"

namespace auq {

DiagonalWeight::DiagonalWeight(Vector diag) : d(std::move(diag)) {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0) || !std::isfinite(d[i]))
      fail(ErrorKind::argument, "diagonal weight entries must be positive and finite");
  }
}

DiagonalWeight DiagonalWeight::constant(Eigen::Index n, double value) {
  return DiagonalWeight(Vector::Constant(n, value));
}

double weighted_norm(const Vector& x, const DiagonalWeight& w) {
  require(x.size() == w.size(), ErrorKind::argument,
          "weighted_norm: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += w.d[i] * x[i] * x[i];
  return std::sqrt(s);
}

ProxRegularizer ProxRegularizer::elastic_net(double l1, double l2) {
  require(l1 >= 0.0 && l2 >= 0.0, ErrorKind::argument,
          "elastic net coefficients must be nonnegative");
  ProxRegularizer r;
  r.kind = Kind::elastic_net;
  r.l1 = l1;
  r.l2 = l2;
  return r;
}

ProxRegularizer ProxRegularizer::tikhonov(double scale) {
  require(scale >= 0.0, ErrorKind::argument, "tikhonov scale must be nonnegative");
  ProxRegularizer r;
  r.kind = Kind::tikhonov;
  r.scale = scale;
  return r;
}

double ProxRegularizer::value(const Vector& v) const {
  if (kind == Kind::elastic_net)
    return l1 * v.lpNorm<1>() + 0.5 * l2 * v.squaredNorm();
  return 0.5 * scale * v.squaredNorm();
}

Eigen::Index ConsensusProblem::dim() const {
  require(!losses.empty(), ErrorKind::argument, "problem has no workers");
  return losses.front()->dim();
}

void ConsensusProblem::validate() const {
  require(!losses.empty(), ErrorKind::argument, "problem has no workers");
  for (const auto& l : losses)
    require(l != nullptr, ErrorKind::argument, "null loss oracle");
  Eigen::Index n = losses.front()->dim();
  require(n > 0, ErrorKind::argument, "loss dimension must be positive");
  for (const auto& l : losses)
    require(l->dim() == n, ErrorKind::argument,
            "all workers must share one dimension");
}

namespace {

double rel_defect(double got, double want) {
  double scale = std::max(std::abs(got), std::abs(want));
  if (scale < 1e-12) return std::abs(got - want);
  return std::abs(got - want) / scale;
}

double rel_defect(const Vector& got, const Vector& want) {
  double scale = std::max(got.norm(), want.norm());
  if (scale < 1e-12) return (got - want).norm();
  return (got - want).norm() / scale;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorKind::oracle, std::string(what) + " is not finite");
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) fail(ErrorKind::oracle, std::string(what) + " is not finite");
}

}  // namespace

OracleReport check_oracle(const LossOracle& loss, const Vector& u, int trials,
                          std::uint64_t seed) {
  require(u.size() == loss.dim(), ErrorKind::argument,
          "check_oracle: point has wrong dimension");
  require(trials > 0, ErrorKind::argument, "check_oracle: trials must be positive");

  Eigen::Index n = u.size();
  double h = 1e-6 * (1.0 + u.lpNorm<Eigen::Infinity>());
  Rng rng(seed);
  OracleReport rep;

  Vector g = loss.gradient(u);
  check_finite(loss.value(u), "loss value");
  check_finite(g, "loss gradient");

  for (int t = 0; t < trials; ++t) {
    Vector x = rng.unit_vector(n);
    Vector z = rng.unit_vector(n);

    // gradient vs central finite difference along x
    double fd = (loss.value(u + h * x) - loss.value(u - h * x)) / (2.0 * h);
    check_finite(fd, "finite-difference probe");
    rep.max_gradient_error = std::max(rep.max_gradient_error, rel_defect(fd, g.dot(x)));

    // hess_vec linearity and symmetry
    double a = 0.5 + rng.next_uniform();
    double b = -1.0 + 2.0 * rng.next_uniform();
    Vector hx = loss.hess_vec(u, x);
    Vector hz = loss.hess_vec(u, z);
    check_finite(hx, "hessian-vector product");
    Vector combined = loss.hess_vec(u, a * x + b * z);
    rep.max_linearity_defect =
        std::max(rep.max_linearity_defect, rel_defect(combined, a * hx + b * hz));
    rep.max_symmetry_defect =
        std::max(rep.max_symmetry_defect, rel_defect(x.dot(hz), z.dot(hx)));
  }
  return rep;
}

}  // namespace auq
