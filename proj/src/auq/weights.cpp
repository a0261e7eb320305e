#include "auq/weights.hpp"

#include <algorithm>
#include <cmath>

#include "auq/lanczos.hpp"
#include "auq/parallel.hpp"
#include "auq/rng.hpp"

namespace auq {

RestrictionInterval RestrictionInterval::from_initial(double a1, double b1) {
  require(a1 > 0.0 && b1 >= a1, ErrorKind::argument,
          "restriction interval needs 0 < low <= high");
  RestrictionInterval r;
  r.initial_low = r.low = a1;
  r.initial_high = r.high = b1;
  r.index = 1;
  return r;
}

RestrictionInterval interval_update(const RestrictionInterval& interval, int k) {
  require(k >= 1, ErrorKind::argument, "interval_update: k must be >= 1");
  require(k == interval.index, ErrorKind::argument,
          "interval_update: out-of-order schedule step");
  double ratio0 = interval.initial_high / interval.initial_low;
  double t = 1.0 / (static_cast<double>(k + 1) * static_cast<double>(k + 1));
  double gamma = t * ratio0 + 1.0 - t;  // target ratio b/a after this step
  RestrictionInterval next = interval;
  next.high = gamma * interval.low;
  next.index = k + 1;
  return next;
}

double CSequence::value(int k) const {
  require(k >= 1, ErrorKind::argument, "c-sequence index must be >= 1");
  double excess = initial_high / initial_low - 1.0;
  if (k == 1) return excess;
  double d = static_cast<double>(k - 1);
  return excess / (d * d);
}

double CSequence::partial_sum_bound() const {
  double excess = initial_high / initial_low - 1.0;
  return excess * (1.0 + 1.6449340668482264365);  // 1 + pi^2/6
}

Vector affine_restrict(const Vector& x, double a, double b) {
  require(x.size() > 0, ErrorKind::argument, "affine_restrict: empty input");
  require(a > 0.0 && b >= a, ErrorKind::argument,
          "affine_restrict: need 0 < a <= b");
  double mn = x.minCoeff();
  double mx = x.maxCoeff();
  double spread = mx - mn;
  // Numerically constant input carries no ordering information; park every
  // coordinate at the midpoint.
  if (spread <= 1e-12 * std::max(1.0, std::max(std::abs(mn), std::abs(mx))))
    return Vector::Constant(x.size(), 0.5 * (a + b));
  double p = (b - a) / spread;
  double q = a - p * mn;
  return (p * x.array() + q).matrix();
}

std::vector<DiagonalWeight> uq_weights(
    const std::vector<std::shared_ptr<const LossOracle>>& losses,
    const std::vector<Vector>& u, const RestrictionInterval& interval,
    const UqWeightOptions& options) {
  require(!losses.empty(), ErrorKind::argument, "uq_weights: no workers");
  require(losses.size() == u.size(), ErrorKind::argument,
          "uq_weights: iterate count mismatch");
  require(options.rank >= 1, ErrorKind::argument, "uq_weights: rank must be >= 1");

  int workers = static_cast<int>(losses.size());
  std::vector<DiagonalWeight> out(static_cast<size_t>(workers));
  parallel_for(workers, options.threads, [&](int j) {
    const LossOracle& loss = *losses[static_cast<size_t>(j)];
    const Vector& uj = u[static_cast<size_t>(j)];
    require(uj.size() == loss.dim(), ErrorKind::argument,
            "uq_weights: iterate has wrong dimension");
    LinearOperator op = [&](const Vector& x) { return loss.hess_vec(uj, x); };
    LowRankEig eig = lanczos_top_r(op, loss.dim(), options.rank,
                                   derive_seed(options.seed, static_cast<std::uint64_t>(j)));
    Vector diag = low_rank_diag(eig);
    out[static_cast<size_t>(j)] =
        DiagonalWeight(affine_restrict(diag, interval.low, interval.high));
  });
  return out;
}

bool audit_weight_ratios(const std::vector<DiagonalWeight>& previous,
                         const std::vector<DiagonalWeight>& current, double c) {
  if (previous.size() != current.size()) return false;
  double hi = 1.0 + c + 1e-12;
  double lo = 1.0 / (1.0 + c) - 1e-12;
  for (size_t j = 0; j < current.size(); ++j) {
    if (previous[j].size() != current[j].size()) return false;
    for (Eigen::Index i = 0; i < current[j].size(); ++i) {
      double ratio = current[j].d[i] / previous[j].d[i];
      if (!(ratio >= lo && ratio <= hi)) return false;
    }
  }
  return true;
}

double residual_balance_update(double rho, double r_norm, double s_norm,
                               const ResidualBalancingConfig& cfg) {
  require(rho > 0.0, ErrorKind::argument, "residual balance: rho must be positive");
  require(cfg.mu >= 1.0 && cfg.tau >= 1.0, ErrorKind::argument,
          "residual balance: need mu >= 1 and tau >= 1");
  if (r_norm > cfg.mu * s_norm) return rho * cfg.tau;
  if (s_norm > cfg.mu * r_norm) return rho / cfg.tau;
  return rho;
}

namespace {

// Barzilai-Borwein curvature from a secant pair, with the correlation that
// decides whether the estimate is trustworthy.  Returns {curvature, cor};
// cor <= 0 whenever no estimate is possible (zero steps, negative curvature).
struct CurvatureEstimate {
  double curvature = 0.0;
  double correlation = 0.0;
};

CurvatureEstimate estimate_curvature(const Vector& dx, const Vector& dy) {
  CurvatureEstimate e;
  double nx = dx.norm();
  double ny = dy.norm();
  if (nx == 0.0 || ny == 0.0) return e;
  double ip = dx.dot(dy);
  e.correlation = ip / (nx * ny);
  if (ip <= 0.0) return e;
  double alpha_sd = (nx * nx) / ip;       // steepest-descent step
  double alpha_mg = ip / (ny * ny);       // minimum-gradient step
  double alpha = (2.0 * alpha_mg > alpha_sd) ? alpha_mg
                                             : (alpha_sd - 0.5 * alpha_mg);
  e.curvature = 1.0 / alpha;
  return e;
}

}  // namespace

SpectralPenaltyState::SpectralPenaltyState(int workers, double rho0,
                                           SpectralPenaltyConfig cfg)
    : cfg_(cfg) {
  require(workers >= 1, ErrorKind::argument, "spectral penalty: need workers >= 1");
  require(rho0 > 0.0, ErrorKind::argument, "spectral penalty: rho0 must be positive");
  require(cfg_.lookback >= 1, ErrorKind::argument,
          "spectral penalty: lookback must be >= 1");
  rho_.assign(static_cast<size_t>(workers), rho0);
  history_.resize(static_cast<size_t>(cfg_.lookback) + 1);
}

void SpectralPenaltyState::record(int k, const std::vector<Vector>& u,
                                  const Vector& v,
                                  const std::vector<Vector>& lambda,
                                  const std::vector<Vector>& lambda_hat) {
  require(u.size() == rho_.size() && lambda.size() == rho_.size() &&
              lambda_hat.size() == rho_.size(),
          ErrorKind::argument, "spectral penalty: worker count mismatch");
  Snapshot& slot = history_[static_cast<size_t>(k) % history_.size()];
  slot.k = k;
  slot.u = u;
  slot.v = v;
  slot.lambda = lambda;
  slot.lambda_hat = lambda_hat;
}

void SpectralPenaltyState::update(int k) {
  int k0 = k - cfg_.lookback;
  if (k0 < 1) return;
  const Snapshot& now = history_[static_cast<size_t>(k) % history_.size()];
  const Snapshot& old = history_[static_cast<size_t>(k0) % history_.size()];
  if (now.k != k || old.k != k0) return;  // history not populated yet

  double cap = 1.0 + cfg_.safeguard / (static_cast<double>(k) * static_cast<double>(k));
  for (size_t j = 0; j < rho_.size(); ++j) {
    CurvatureEstimate local =
        estimate_curvature(now.u[j] - old.u[j], now.lambda_hat[j] - old.lambda_hat[j]);
    CurvatureEstimate consensus =
        estimate_curvature(now.v - old.v, now.lambda[j] - old.lambda[j]);
    double rho = rho_[j];
    double proposal;
    if (local.correlation > cfg_.eps_cor && consensus.correlation > cfg_.eps_cor)
      proposal = std::sqrt(local.curvature * consensus.curvature);
    else if (local.correlation > cfg_.eps_cor)
      proposal = local.curvature;
    else if (consensus.correlation > cfg_.eps_cor)
      proposal = consensus.curvature;
    else
      proposal = rho;
    rho_[j] = std::clamp(proposal, rho / cap, rho * cap);
  }
}

}  // namespace auq
