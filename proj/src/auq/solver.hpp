#pragma once

#include <string>
#include <vector>

#include "auq/inner.hpp"
#include "auq/problem.hpp"
#include "auq/weights.hpp"

namespace auq {

// Weighting scheme for the consensus penalty.
enum class Scheme {
  cadmm,  // fixed scalar penalty
  rb,     // residual balancing
  ac,     // adaptive per-worker spectral penalty
  auq,    // adaptive uncertainty-based diagonal weights
};

const char* scheme_name(Scheme s);
bool parse_scheme(const std::string& name, Scheme* out);

struct SolverConfig {
  Scheme scheme = Scheme::auq;
  int rank = 5;                 // eigenvalue sketch rank (auq)
  double interval_low = 0.1;    // initial weight bracket (auq)
  double interval_high = 1.0;
  int weight_refresh_every = 1; // recompute uncertainty weights every k iterations
  double eps_abs = 1e-4;
  double eps_rel = 1e-5;
  int max_iter = 250;
  double rho0 = 1.0;            // initial scalar penalty (all schemes)
  std::uint64_t seed = 0;
  int threads = 0;              // 0 or 1 = run inline
  InnerSettings inner;          // .tolerance acts as the floor; see run()
  ResidualBalancingConfig rb;
  SpectralPenaltyConfig ac;

  void validate() const;
};

struct ResidualReport {
  double r_norm = 0.0;
  double s_norm = 0.0;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  bool converged() const { return r_norm <= eps_primal && s_norm <= eps_dual; }
};

struct TraceRecord {
  int k = 0;
  double loss = 0.0;  // sum_j f_j(v) + g(v)
  double r_norm = 0.0;
  double s_norm = 0.0;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  double tnorm_step = 0.0;
  bool lemma41_ok = true;  // weight-ratio audit; vacuously true off the auq scheme
  double wall_ms = 0.0;    // measured; written as 0 in trace CSVs (see below)
};

struct RunResult {
  Vector solution;  // final consensus iterate
  std::vector<TraceRecord> trace;
  bool converged = false;
  int iterations = 0;
  int inner_warnings = 0;  // local subproblems that hit the iteration budget
  std::vector<DiagonalWeight> first_weights;  // weights used at iteration 1
};

// Residuals and stopping thresholds after iteration k:
//   r^2 = sum_j |u_j - v|^2,     s^2 = N |v - v_prev|^2,
//   eps_primal = sqrt(n) eps_abs + eps_rel max(sqrt(sum_j |u_j|^2), s),
//   eps_dual   = sqrt(n) eps_abs + eps_rel sqrt(sum_j |lambda_j|^2).
ResidualReport compute_residuals(const SolverState& state, const Vector& v_prev,
                                 double eps_abs, double eps_rel);

// Squared step length in the scheme's natural metric:
// |v - v_prev|^2 summed over every worker's weight, plus the multiplier steps
// measured in the inverse weights.  Monotone decay of this quantity is the
// convergence certificate the trace reports.
double tnorm_step(const Vector& v, const Vector& v_prev,
                  const std::vector<Vector>& lambda,
                  const std::vector<Vector>& lambda_prev,
                  const std::vector<DiagonalWeight>& weights);

// One local subproblem:  argmin_u f(u) + 1/2 |(v - u) + W^{-1} lambda|^2_W.
// Quadratic losses go through conjugate gradients on the normal equations;
// everything else through L-BFGS warm-started at `warm`.  Sets *budget_hit
// when the inner solver stopped on its iteration cap.
Vector solve_local(const LossOracle& loss, const Vector& v, const Vector& lambda,
                   const DiagonalWeight& w, const Vector& warm,
                   const InnerSettings& settings, bool* budget_hit);

// Full consensus run.
RunResult run(const ConsensusProblem& problem, const SolverConfig& config);

// Writes `k,loss,r_norm,s_norm,eps_primal,eps_dual,tnorm_step,lemma41_ok,wall_ms`
// rows, LF line endings, '.' decimal separator.  The wall_ms column is written
// as 0 for byte-reproducibility; measured times live in TraceRecord::wall_ms.
void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path);

}  // namespace auq
