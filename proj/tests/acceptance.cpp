// Acceptance gate: one end-to-end check per release property.  Each check
// prints a [PASS]/[FAIL] line with its wall time; the process exits nonzero
// if any check fails.  Checks with a stated time budget also fail when they
// exceed it.
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "auq/data.hpp"
#include "auq/experiment.hpp"
#include "auq/lanczos.hpp"
#include "auq/losses.hpp"
#include "auq/problem.hpp"
#include "auq/rng.hpp"
#include "auq/solver.hpp"
#include "auq/weights.hpp"
#include "test_support.hpp"

using namespace auq;

namespace {

// Every adaptive-weight run the gate performs funnels through note_auq so the
// ratio-audit check can assert over the whole suite, not a single run.
struct AuqAuditLog {
  int runs = 0;
  long records = 0;
  bool all_ok = true;
};
AuqAuditLog g_audit;

void note_auq(const RunResult& r) {
  ++g_audit.runs;
  for (const TraceRecord& rec : r.trace) {
    ++g_audit.records;
    g_audit.all_ok = g_audit.all_ok && rec.lemma41_ok;
  }
}

// Benchmark problems: 8 Gaussian classes in 64 dimensions, 100 samples per
// class, one shard per worker.  Noise and regularizer put each loss in the
// regime where the data term, not the regularizer, drives consensus.
ConsensusProblem blobs_problem(const std::string& kind, int workers,
                               std::uint64_t seed) {
  double noise = kind == "svm" ? 0.1 : 0.02;
  Dataset all = synth_blobs(64, 8, 100, noise, derive_seed(seed, 5, 0));
  std::vector<Dataset> shards = partition_by_class(all, workers, 100);
  ConsensusProblem p;
  for (const Dataset& s : shards) {
    if (kind == "elasticnet") {
      Vector y(s.labels.size());
      for (size_t i = 0; i < s.labels.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = s.labels[i];
      p.losses.push_back(std::make_shared<ElasticNetLoss>(s.features, y));
    } else if (kind == "multinomial") {
      p.losses.push_back(std::make_shared<MultinomialLoss>(s.features, s.labels, 8));
    } else {
      Vector y(s.labels.size());
      for (size_t i = 0; i < s.labels.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = s.labels[i] < 4 ? -1.0 : 1.0;
      p.losses.push_back(std::make_shared<SmoothedSvmLoss>(s.features.transpose(), y));
    }
  }
  if (kind == "elasticnet")
    p.regularizer = ProxRegularizer::elastic_net(1e-2, 1e-2);
  else if (kind == "multinomial")
    p.regularizer = ProxRegularizer::tikhonov(0.01);
  else
    p.regularizer = ProxRegularizer::tikhonov(0.1);
  return p;
}

// Mid-run comparison point: tolerances tightened so no scheme stops early and
// every trace reaches iteration 50.
double loss_at_50(const ConsensusProblem& p, Scheme s, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.scheme = s;
  cfg.max_iter = 50;
  cfg.seed = seed;
  cfg.threads = 4;
  cfg.eps_abs = 1e-12;
  cfg.eps_rel = 0.0;
  RunResult r = run(p, cfg);
  if (s == Scheme::auq) note_auq(r);
  return r.trace.back().loss;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Loss oracles match central finite differences.
bool crit_oracles(std::string* detail) {
  Dataset d = synth_blobs(10, 3, 15, 0.3, 7);
  std::vector<std::shared_ptr<const LossOracle>> losses;
  Vector y_reg(d.labels.size()), y_svm(d.labels.size());
  for (size_t i = 0; i < d.labels.size(); ++i) {
    y_reg[static_cast<Eigen::Index>(i)] = d.labels[i];
    y_svm[static_cast<Eigen::Index>(i)] = d.labels[i] % 2 == 0 ? -1.0 : 1.0;
  }
  losses.push_back(std::make_shared<ElasticNetLoss>(d.features, y_reg));
  losses.push_back(std::make_shared<MultinomialLoss>(d.features, d.labels, 3));
  losses.push_back(std::make_shared<SmoothedSvmLoss>(d.features.transpose(), y_svm));
  // The smoothed hinge's higher derivatives blow up like 1/eps^2 for samples
  // inside the smoothing band, so its steps are smaller; the quadratic and
  // softmax losses prefer larger steps before rounding takes over.
  double grad_steps[] = {1e-5, 1e-5, 3e-6};
  double hvp_steps[] = {1e-5, 1e-5, 1e-7};

  double worst_g = 0.0, worst_h = 0.0;
  for (size_t li = 0; li < losses.size(); ++li) {
    const LossOracle& loss = *losses[li];
    std::mt19937 gen(100 + static_cast<unsigned>(li));
    std::normal_distribution<double> dist;
    for (int pt = 0; pt < 100; ++pt) {
      Vector u(loss.dim()), x(loss.dim());
      for (Eigen::Index i = 0; i < loss.dim(); ++i) {
        u[i] = dist(gen);
        x[i] = dist(gen);
      }
      Vector g = loss.gradient(u);
      Vector g_fd = testsup::fd_gradient(loss, u, grad_steps[li]);
      worst_g = std::max(worst_g, (g - g_fd).norm() / std::max(1.0, g_fd.norm()));
      Vector hv = loss.hess_vec(u, x);
      Vector hv_fd = testsup::fd_hess_vec(loss, u, x, hvp_steps[li]);
      worst_h = std::max(worst_h, (hv - hv_fd).norm() / std::max(1.0, hv_fd.norm()));
    }
  }
  *detail = fmt("max rel err: grad %.2e, hvp %.2e", worst_g, worst_h);
  return worst_g < 1e-4 && worst_h < 1e-4;
}

// ---------------------------------------------------------------------------
// 2. The weighted proximal step matches per-coordinate numeric minimization.
//
// Reference minimizer of  g(x) + 1/2 sum_j w_j (x - t_j)^2  for one
// coordinate: bisection on the strictly increasing subderivative in long
// double.  Golden-section on values stalls near 1e-8; root-finding on the
// optimality condition localizes the argmin to machine precision while
// staying independent of the closed form under test.
double prox_coordinate_ref(const ProxRegularizer& reg,
                           const std::vector<long double>& w,
                           const std::vector<long double>& t) {
  auto slope = [&](long double x) {
    long double s = reg.kind == ProxRegularizer::Kind::elastic_net
                        ? reg.l1 * (x > 0 ? 1.0L : -1.0L) + reg.l2 * x
                        : static_cast<long double>(reg.scale) * x;
    for (size_t j = 0; j < w.size(); ++j) s += w[j] * (x - t[j]);
    return s;
  };
  // The subdifferential at zero is [-l1, l1] shifted by the quadratic part.
  if (reg.kind == ProxRegularizer::Kind::elastic_net) {
    long double lin = 0.0L;
    for (size_t j = 0; j < w.size(); ++j) lin -= w[j] * t[j];
    if (std::abs(static_cast<double>(lin)) <= reg.l1) return 0.0;
  }
  long double lo = -20.0L, hi = 20.0L;
  for (int it = 0; it < 200; ++it) {
    long double mid = 0.5L * (lo + hi);
    (slope(mid) < 0.0L ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

bool crit_prox(std::string* detail) {
  double worst = 0.0;
  for (int kind = 0; kind < 2; ++kind) {
    for (int inst = 0; inst < 50; ++inst) {
      std::mt19937 gen(11 + 97 * kind + inst);
      std::normal_distribution<double> dist;
      std::uniform_real_distribution<double> unif;
      int N = 1 + inst % 4;
      Eigen::Index n = 1 + (inst * 3) % 8;
      ProxRegularizer reg = kind == 0
          ? ProxRegularizer::elastic_net(unif(gen), 0.05 + unif(gen))
          : ProxRegularizer::tikhonov(0.05 + unif(gen));
      std::vector<Vector> targets;
      std::vector<DiagonalWeight> weights;
      for (int j = 0; j < N; ++j) {
        Vector t(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          t[i] = 2.0 * dist(gen);
          w[i] = 0.2 + std::abs(dist(gen));
        }
        targets.push_back(t);
        weights.push_back(DiagonalWeight(w));
      }
      Vector v = weighted_prox(reg, targets, weights);
      for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<long double> w, t;
        for (int j = 0; j < N; ++j) {
          w.push_back(weights[static_cast<size_t>(j)].d[i]);
          t.push_back(targets[static_cast<size_t>(j)][i]);
        }
        double ref = prox_coordinate_ref(reg, w, t);
        worst = std::max(worst, std::abs(v[i] - ref));
      }
    }
  }
  *detail = fmt("max abs err %.2e over 100 instances", worst);
  return worst <= 1e-8;
}

// ---------------------------------------------------------------------------
// 3. Sketched top eigenvalues match a dense eigensolver.
bool crit_lanczos(std::string* detail) {
  double worst = 0.0;
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> unif;
  for (int m = 0; m < 20; ++m) {
    Eigen::Index n = m == 0 ? 64 : 8 + (m * 7) % 57;
    double top = 1.0 + 9.0 * unif(gen);
    double decay = 0.4 + 0.35 * unif(gen);
    Vector spectrum(n);
    for (Eigen::Index i = 0; i < n; ++i)
      spectrum[i] = top * std::pow(decay, static_cast<double>(i)) + 1e-3;
    Matrix H = testsup::spd_with_spectrum(spectrum, 500 + static_cast<unsigned>(m));
    Eigen::SelfAdjointEigenSolver<Matrix> dense(H);
    Vector all = dense.eigenvalues().reverse();
    LinearOperator op = [&](const Vector& x) { return Vector(H * x); };
    for (int r : {1, 3, static_cast<int>(n)}) {
      LowRankEig eig = lanczos_top_r(op, n, r, 900 + static_cast<std::uint64_t>(m));
      for (int i = 0; i < r; ++i)
        worst = std::max(worst, std::abs(eig.values[i] - all[i]) / all[i]);
    }
  }
  *detail = fmt("max rel err %.2e over 20 matrices", worst);
  return worst < 1e-6;
}

// ---------------------------------------------------------------------------
// 4. Weight-ratio audit over the whole suite + summability of the bound.
bool crit_ratio_audit(std::string* detail) {
  // Partial sums of the ratio budget stay below the closed-form ceiling.
  bool sums_ok = true;
  for (double a : {0.1, 0.2}) {
    CSequence seq{a, 1.0};
    double ceiling = (1.0 / a - 1.0) * (1.0 + M_PI * M_PI / 6.0) + 1e-9;
    double sum = 0.0;
    for (int k = 1; k <= 100000; ++k) {
      sum += seq.value(k);
      sums_ok = sums_ok && sum < ceiling;
    }
  }

  // Dedicated runs at several refresh cadences; every other adaptive run in
  // the gate is folded in through note_auq.
  ConsensusProblem p = blobs_problem("multinomial", 8, 1);
  for (int every : {1, 3, 7}) {
    SolverConfig cfg;
    cfg.scheme = Scheme::auq;
    cfg.weight_refresh_every = every;
    cfg.max_iter = 30;
    cfg.seed = 1;
    cfg.threads = 4;
    cfg.eps_abs = 1e-12;
    cfg.eps_rel = 0.0;
    note_auq(run(p, cfg));
  }

  *detail = fmt("%d adaptive runs, %ld records audited; budget sums %s",
                g_audit.runs, g_audit.records, sums_ok ? "bounded" : "UNBOUNDED");
  return sums_ok && g_audit.all_ok && g_audit.runs >= 15;
}

// ---------------------------------------------------------------------------
// 5. Single-worker elastic net reaches the closed-form solution.
bool crit_fixed_point(std::string* detail) {
  Eigen::Index n = 20;
  std::mt19937 gen(5);
  std::normal_distribution<double> dist;
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = 2.0 * dist(gen);
  double l1 = 0.1, l2 = 0.1;

  ConsensusProblem p;
  p.losses.push_back(std::make_shared<ElasticNetLoss>(Matrix::Identity(n, n), y));
  p.regularizer = ProxRegularizer::elastic_net(l1, l2);

  SolverConfig cfg;
  cfg.scheme = Scheme::cadmm;  // identity weights with the default unit penalty
  cfg.seed = 5;
  cfg.eps_abs = 1e-8;
  cfg.eps_rel = 0.0;
  RunResult r = run(p, cfg);

  // argmin 1/2 (v - y_i)^2 + l1 |v| + l2/2 v^2, coordinate-wise.
  Vector expected(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double shrunk = std::max(std::abs(y[i]) - l1, 0.0);
    expected[i] = (y[i] > 0 ? shrunk : -shrunk) / (1.0 + l2);
  }
  double err = (r.solution - expected).lpNorm<Eigen::Infinity>();
  *detail = fmt("converged %s in %d iters, max err %.2e",
                r.converged ? "yes" : "NO", r.iterations, err);
  return r.converged && r.iterations < cfg.max_iter && err <= 1e-6;
}

// ---------------------------------------------------------------------------
// 6. Weighted first-iteration averaging at least halves the denoising error.
bool crit_denoise(std::string* detail) {
  Matrix img = demo_image(32);
  DenoiseInstance inst = quadrant_denoise(img, 0.1, 1, 1e-3);

  auto first_mse = [&](Scheme s) {
    SolverConfig cfg;
    cfg.scheme = s;
    cfg.max_iter = 1;
    cfg.seed = 1;
    // Wide bracket: each quadrant's Hessian is a 0/1 mask, so the mapped
    // weights are near-binary and the out-of-quadrant votes are suppressed.
    cfg.interval_low = 0.01;
    cfg.interval_high = 1.0;
    cfg.eps_abs = 1e-12;
    cfg.eps_rel = 0.0;
    RunResult r = run(inst.problem, cfg);
    if (s == Scheme::auq) note_auq(r);
    return (r.solution - inst.ground_truth).squaredNorm() /
           static_cast<double>(inst.ground_truth.size());
  };
  double weighted = first_mse(Scheme::auq);
  double unweighted = first_mse(Scheme::cadmm);
  *detail = fmt("MSE weighted %.4g vs unweighted %.4g (x%.2f)", weighted,
                unweighted, unweighted / weighted);
  return 2.0 * weighted <= unweighted;
}

// ---------------------------------------------------------------------------
// 7. Adaptive weighting leads every baseline at iteration 50.
bool crit_outperformance(std::string* detail) {
  for (const char* kind : {"elasticnet", "multinomial", "svm"}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      ConsensusProblem p = blobs_problem(kind, 8, seed);
      double adaptive = loss_at_50(p, Scheme::auq, seed);
      double fixed = loss_at_50(p, Scheme::cadmm, seed);
      double balanced = loss_at_50(p, Scheme::rb, seed);
      double spectral = loss_at_50(p, Scheme::ac, seed);
      double best = std::min({fixed, balanced, spectral});
      if (adaptive > best) {
        *detail = fmt("%s seed %llu: adaptive %.6g > best baseline %.6g", kind,
                      static_cast<unsigned long long>(seed), adaptive, best);
        return false;
      }
    }
  }
  *detail = "3 losses x 3 seeds, adaptive at or below every baseline";
  return true;
}

// ---------------------------------------------------------------------------
// 8. Sketch rank has negligible effect on the converged loss.
bool crit_rank(std::string* detail) {
  testsup::TempDir dir("acceptance-rank");
  ExperimentConfig cfg;
  cfg.loss = ExperimentConfig::LossKind::multinomial;
  cfg.data = ExperimentConfig::DataKind::synth;
  cfg.synth_dim = 64;
  cfg.synth_classes = 8;
  cfg.synth_per_class = 100;
  cfg.synth_noise = 0.02;
  cfg.workers = 8;
  cfg.per_worker = 100;
  cfg.tikhonov = 0.01;
  cfg.seed = 1;
  cfg.schemes = {Scheme::auq};
  cfg.out_dir = dir.path().string();
  ExperimentResult res = rank_sweep(cfg, {1, 5}, 4);
  for (const RunResult& r : res.runs) note_auq(r);
  double l1 = res.outcomes[0].final_loss;
  double l5 = res.outcomes[1].final_loss;
  double rel = std::abs(l1 - l5) / std::max(std::abs(l1), std::abs(l5));
  *detail = fmt("final loss rank1 %.6g vs rank5 %.6g (rel %.2e)", l1, l5, rel);
  return rel <= 0.05;
}

// ---------------------------------------------------------------------------
// 9. Adaptive weighting degrades less when workers go from 2 to 8.
bool crit_splittings(std::string* detail) {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ConsensusProblem two = blobs_problem("multinomial", 2, seed);
    ConsensusProblem eight = blobs_problem("multinomial", 8, seed);
    double a2 = loss_at_50(two, Scheme::auq, seed);
    double a8 = loss_at_50(eight, Scheme::auq, seed);
    double c2 = loss_at_50(two, Scheme::cadmm, seed);
    double c8 = loss_at_50(eight, Scheme::cadmm, seed);
    double deg_adaptive = (a8 - a2) / std::abs(a2);
    double deg_fixed = (c8 - c2) / std::abs(c2);
    if (!(deg_adaptive < deg_fixed)) {
      *detail = fmt("seed %llu: adaptive degradation %.4f >= fixed %.4f",
                    static_cast<unsigned long long>(seed), deg_adaptive, deg_fixed);
      return false;
    }
  }
  *detail = "adaptive degradation below fixed-penalty on all 3 seeds";
  return true;
}

// ---------------------------------------------------------------------------
// 10. Step norms collapse by three orders of magnitude on converged runs.
bool crit_tnorm(std::string* detail) {
  Dataset all = synth_blobs(16, 4, 50, 0.05, derive_seed(7, 5, 0));
  std::vector<Dataset> shards = partition_by_class(all, 4, 50);
  ConsensusProblem p;
  for (const Dataset& s : shards) {
    Vector y(s.labels.size());
    for (size_t i = 0; i < s.labels.size(); ++i)
      y[static_cast<Eigen::Index>(i)] = s.labels[i];
    p.losses.push_back(std::make_shared<ElasticNetLoss>(s.features, y));
  }
  p.regularizer = ProxRegularizer::elastic_net(1e-2, 1e-2);

  int converged = 0;
  double worst_ratio = 0.0;
  for (Scheme s : {Scheme::cadmm, Scheme::rb, Scheme::ac, Scheme::auq}) {
    SolverConfig cfg;
    cfg.scheme = s;
    cfg.seed = 7;
    cfg.threads = 4;
    RunResult r = run(p, cfg);
    if (s == Scheme::auq) note_auq(r);
    if (!r.converged) continue;
    ++converged;
    worst_ratio = std::max(
        worst_ratio, r.trace.back().tnorm_step / r.trace.front().tnorm_step);
  }
  *detail = fmt("%d converged runs, worst final/first step ratio %.2e",
                converged, worst_ratio);
  return converged >= 2 && worst_ratio < 1e-3;
}

// ---------------------------------------------------------------------------
// 11. Traces are byte-identical across thread counts.
bool crit_determinism(std::string* detail) {
  testsup::TempDir dir("acceptance-det");
  ConsensusProblem p = blobs_problem("multinomial", 8, 1);
  SolverConfig cfg;
  cfg.scheme = Scheme::auq;
  cfg.seed = 1;
  cfg.max_iter = 20;
  cfg.eps_abs = 1e-12;
  cfg.eps_rel = 0.0;

  cfg.threads = 1;
  RunResult serial = run(p, cfg);
  cfg.threads = 8;
  RunResult parallel = run(p, cfg);
  note_auq(serial);
  note_auq(parallel);
  write_trace_csv(serial.trace, dir.file("serial.csv"));
  write_trace_csv(parallel.trace, dir.file("parallel.csv"));
  bool same = testsup::read_file(dir.file("serial.csv")) ==
              testsup::read_file(dir.file("parallel.csv"));

  // The fixed-penalty path shares the reduction code; cover it too.
  ConsensusProblem q = blobs_problem("elasticnet", 8, 2);
  cfg.scheme = Scheme::cadmm;
  cfg.threads = 1;
  RunResult s1 = run(q, cfg);
  cfg.threads = 3;
  RunResult s3 = run(q, cfg);
  write_trace_csv(s1.trace, dir.file("s1.csv"));
  write_trace_csv(s3.trace, dir.file("s3.csv"));
  same = same && testsup::read_file(dir.file("s1.csv")) ==
                     testsup::read_file(dir.file("s3.csv"));
  *detail = same ? "1 vs 8 threads and 1 vs 3 threads identical"
                 : "trace bytes differ across thread counts";
  return same;
}

struct Check {
  int number;
  const char* what;
  double budget_s;  // 0 = no stated budget
  bool (*fn)(std::string*);
};

}  // namespace

int main() {
  const Check checks[] = {
      {1, "loss oracle gradients and Hessian products match finite differences",
       10.0, crit_oracles},
      {2, "weighted proximal step matches per-coordinate numeric minimization",
       5.0, crit_prox},
      {3, "sketched top eigenvalues match a dense eigensolver", 10.0,
       crit_lanczos},
      {4, "consecutive weight ratios stay within the summable budget on every "
          "adaptive run",
       0.0, crit_ratio_audit},
      {5, "single-worker elastic net reaches the closed-form solution", 1.0,
       crit_fixed_point},
      {6, "weighted first-iteration averaging at least halves the denoising "
          "error",
       1.0, crit_denoise},
      {7, "adaptive weighting leads every baseline at iteration 50", 120.0,
       crit_outperformance},
      {8, "sketch rank has negligible effect on the converged loss", 120.0,
       crit_rank},
      {9, "adaptive weighting degrades less when workers go from 2 to 8", 180.0,
       crit_splittings},
      {10, "step norms collapse by three orders of magnitude on converged runs",
       0.0, crit_tnorm},
      {11, "traces are byte-identical across thread counts", 0.0,
       crit_determinism},
  };

  // The audit check (4) folds in every adaptive run the gate performs, so it
  // executes last; lines still print in numeric order.
  std::vector<int> order = {1, 2, 3, 5, 6, 7, 8, 9, 10, 11, 4};
  std::vector<std::string> lines(sizeof(checks) / sizeof(checks[0]));
  bool all_ok = true;
  for (int number : order) {
    const Check& c = checks[static_cast<size_t>(number - 1)];
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = c.fn(&detail);
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      ok = false;
      detail += fmt(" [over %.0fs budget]", c.budget_s);
    }
    all_ok = all_ok && ok;
    lines[static_cast<size_t>(number - 1)] =
        fmt("[%s] %2d. %s (%.2fs) — %s", ok ? "PASS" : "FAIL", c.number, c.what,
            secs, detail.c_str());
  }
  for (const std::string& line : lines) std::printf("%s\n", line.c_str());
  std::printf("%s\n", all_ok ? "acceptance: all 11 criteria passed"
                             : "acceptance: FAILURES present");
  return all_ok ? 0 : 1;
}
