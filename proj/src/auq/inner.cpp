#include "auq/inner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace auq {

InnerResult conjugate_gradient(const std::function<Vector(const Vector&)>& hess,
                               const DiagonalWeight& w, const Vector& rhs,
                               const Vector& x0, const InnerSettings& settings) {
  Eigen::Index n = rhs.size();
  require(x0.size() == n && w.size() == n, ErrorKind::argument,
          "conjugate_gradient: dimension mismatch");
  auto apply = [&](const Vector& p) -> Vector { return hess(p) + w.apply(p); };

  InnerResult res;
  res.x = x0;
  Vector r = rhs - apply(res.x);
  Vector p = r;
  double rs = r.squaredNorm();
  double tol2 = settings.tolerance * settings.tolerance;
  int cap = std::max<int>(settings.max_iterations, static_cast<int>(n));

  for (int it = 0; it < cap && rs > tol2; ++it) {
    Vector ap = apply(p);
    double pap = p.dot(ap);
    if (!(pap > 0.0)) break;  // numerically lost positive definiteness
    double alpha = rs / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
    res.iterations = it + 1;
  }
  // Report the true residual, not the recurrence's drifted copy.
  res.grad_norm = (rhs - apply(res.x)).norm();
  res.converged = res.grad_norm <= settings.tolerance;
  return res;
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;

struct LineEval {
  double a = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative along the search direction
  Vector x, g;
};

class LineSearch {
 public:
  LineSearch(const SmoothObjective& obj, const Vector& x, const Vector& d,
             double f0, double slope0)
      : obj_(obj), x0_(x), d_(d), f0_(f0), slope0_(slope0) {}

  LineEval at(double a) {
    LineEval e;
    e.a = a;
    e.x = x0_ + a * d_;
    e.g.resize(x0_.size());
    e.f = obj_(e.x, e.g);
    e.slope = e.g.dot(d_);
    if (std::isfinite(e.f)) {
      if (best_.x.size() == 0 || e.f < best_.f) best_ = e;
      double gn = e.g.norm();
      if (std::isfinite(gn) && (flattest_.x.size() == 0 || gn < flattest_norm_)) {
        flattest_ = e;
        flattest_norm_ = gn;
      }
    }
    return e;
  }

  bool sufficient_decrease(const LineEval& e) const {
    return std::isfinite(e.f) && e.f <= f0_ + kArmijo * e.a * slope0_;
  }
  bool curvature_ok(const LineEval& e) const {
    return std::abs(e.slope) <= -kCurvature * slope0_;
  }
  const LineEval& best() const { return best_; }
  const LineEval& flattest() const { return flattest_; }

  // Strong Wolfe bracketing; returns true with `out` satisfying both
  // conditions, false when the search gave up (best() still tracks the
  // lowest point seen).
  bool run(double a_init, LineEval& out) {
    LineEval prev;
    prev.a = 0.0;
    prev.f = f0_;
    prev.slope = slope0_;
    double a = a_init;
    for (int i = 0; i < 20; ++i) {
      LineEval e = at(a);
      if (!sufficient_decrease(e) || (i > 0 && e.f >= prev.f))
        return zoom(prev, e, out);
      if (curvature_ok(e)) {
        out = e;
        return true;
      }
      if (e.slope >= 0.0) return zoom(e, prev, out);
      prev = e;
      a = std::min(2.0 * a, 1e8);
    }
    return false;
  }

 private:
  bool zoom(LineEval lo, LineEval hi, LineEval& out) {
    for (int i = 0; i < 30; ++i) {
      double a = 0.5 * (lo.a + hi.a);
      LineEval e = at(a);
      if (!sufficient_decrease(e) || e.f >= lo.f) {
        hi = e;
      } else {
        if (curvature_ok(e)) {
          out = e;
          return true;
        }
        if (e.slope * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = e;
      }
      if (std::abs(hi.a - lo.a) <= 1e-14 * std::max(1.0, std::abs(lo.a))) break;
    }
    return false;
  }

  const SmoothObjective& obj_;
  const Vector& x0_;
  const Vector& d_;
  double f0_, slope0_;
  LineEval best_;
  LineEval flattest_;  // smallest gradient norm seen
  double flattest_norm_ = 0.0;
};

}  // namespace

InnerResult minimize_lbfgs(const SmoothObjective& objective, const Vector& x0,
                           const InnerSettings& settings) {
  InnerResult res;
  res.x = x0;
  Vector g(x0.size());
  double f = objective(res.x, g);
  require(std::isfinite(f) && g.allFinite(), ErrorKind::oracle,
          "lbfgs: objective not finite at the starting point");

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int it = 0; it < settings.max_iterations; ++it) {
    res.grad_norm = g.norm();
    if (res.grad_norm <= settings.tolerance) {
      res.converged = true;
      return res;
    }

    // Two-loop recursion.
    Vector d = -g;
    std::vector<double> coef(s_hist.size());
    for (size_t i = s_hist.size(); i-- > 0;) {
      coef[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= coef[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const Vector& s = s_hist.back();
      const Vector& y = y_hist.back();
      d *= s.dot(y) / y.squaredNorm();
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (coef[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {  // curvature history went stale; fall back to steepest
      d = -g;
      slope = -g.squaredNorm();
    }

    LineSearch search(objective, res.x, d, f, slope);
    LineEval step;
    double a0 = (it == 0) ? std::min(1.0, 1.0 / std::max(res.grad_norm, 1e-12)) : 1.0;
    bool ok = search.run(a0, step);
    if (!ok) {
      const LineEval& best = search.best();
      if (best.x.size() > 0 && best.f < f) {
        step = best;
      } else {
        // Near the optimum the Armijo test becomes undecidable: the
        // predicted decrease is below one ulp of f, so rounding noise
        // rejects every trial.  Accept the smallest-gradient trial when
        // the value is flat to machine precision and the gradient still
        // shrinks geometrically; otherwise no progress is certifiable.
        const LineEval& flat = search.flattest();
        double slack = 16.0 * std::numeric_limits<double>::epsilon() *
                       (std::abs(f) + 1.0);
        if (flat.x.size() > 0 && flat.f <= f + slack &&
            flat.g.norm() < 0.99 * res.grad_norm) {
          step = flat;
        } else {
          break;  // no progress possible
        }
      }
    }

    Vector s = step.x - res.x;
    Vector y = step.g - g;
    double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > settings.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    res.x = step.x;
    f = step.f;
    g = step.g;
    res.iterations = it + 1;
  }
  res.grad_norm = g.norm();
  res.converged = res.grad_norm <= settings.tolerance;
  return res;
}

}  // namespace auq
