#pragma once

#include <string>
#include <vector>

#include "auq/data.hpp"
#include "auq/solver.hpp"

namespace auq {

// Flat `key = value` experiment description ('#' comments, one pair per
// line).  Parse and validation errors carry file:line positions.
struct ExperimentConfig {
  enum class LossKind { elasticnet, multinomial, svm, denoise_demo };
  enum class DataKind { synth, mnist, demo };

  LossKind loss = LossKind::elasticnet;
  DataKind data = DataKind::synth;

  // data sources
  std::string mnist_images, mnist_labels;
  Eigen::Index synth_dim = 64;
  int synth_classes = 8;
  Eigen::Index synth_per_class = 200;
  double synth_noise = 0.1;
  Eigen::Index demo_side = 32;
  double demo_noise = 0.1;

  // partitioning
  int workers = 8;
  Eigen::Index per_worker = 200;  // per-class cap during partitioning

  // schemes and solver knobs
  std::vector<Scheme> schemes;
  int rank = 5;
  double interval_low = 0.1, interval_high = 1.0;
  double eps_abs = 1e-4, eps_rel = 1e-5;
  int max_iter = 250;
  double rho0 = 1.0;
  std::uint64_t seed = 1;

  // regularizers
  double rho1 = 1e-2, rho2 = 1e-2;  // elastic net
  double tikhonov = 1.0;            // multinomial / svm
  double svm_eps = 1.0 / 5000.0;
  double denoise_alpha = 1e-3;

  std::string out_dir = ".";

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& path);
// Same parser over in-memory text; `name` labels diagnostics.
ExperimentConfig parse_experiment_config_text(const std::string& text,
                                              const std::string& name);

const char* loss_kind_name(ExperimentConfig::LossKind k);

// Builds the consensus problem the config describes (loads/synthesizes the
// data and shards it).
ConsensusProblem build_problem(const ExperimentConfig& cfg);

struct SchemeOutcome {
  Scheme scheme = Scheme::auq;
  int rank = 0;
  int iterations = 0;
  bool converged = false;
  double final_loss = 0.0;
  double wall_ms = 0.0;  // measured run time (not reproducible byte-for-byte)
  std::string trace_path;
};

struct ExperimentResult {
  std::vector<SchemeOutcome> outcomes;
  std::vector<RunResult> runs;  // aligned with outcomes
};

// Runs every configured scheme on the shared problem instance and writes
// <loss>_<scheme>.csv traces plus summary.csv under cfg.out_dir.  The
// denoise-demo loss also writes per-worker weight vectors, both
// first-iteration consensus images (weighted vs fixed-penalty) and their
// mean squared errors against the ground truth.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads);

// Repeats the auq run across sketch ranks, writing
// <loss>_auq_rank<r>.csv traces, summary.csv, and rank_diffs.csv with
// pairwise relative differences of final losses.
ExperimentResult rank_sweep(const ExperimentConfig& cfg,
                            const std::vector<int>& ranks, int threads);

}  // namespace auq
