#include "auqadmm.h"

#include <cstring>
#include <string>

#include "auq/data.hpp"
#include "auq/experiment.hpp"
#include "auq/losses.hpp"
#include "auq/solver.hpp"

struct auq_dataset {
  auq::Dataset d;
};

struct auq_problem {
  auq::ConsensusProblem p;
};

struct auq_trace {
  auq::RunResult r;
  int64_t dim = 0;
};

namespace {

thread_local std::string g_last_error;

auq_status status_of(auq::ErrorKind kind) {
  switch (kind) {
    case auq::ErrorKind::argument: return AUQ_ERROR_ARGUMENT;
    case auq::ErrorKind::data: return AUQ_ERROR_DATA;
    case auq::ErrorKind::io: return AUQ_ERROR_IO;
    case auq::ErrorKind::config: return AUQ_ERROR_CONFIG;
    case auq::ErrorKind::solver: return AUQ_ERROR_SOLVER;
    case auq::ErrorKind::oracle: return AUQ_ERROR_ORACLE;
  }
  return AUQ_ERROR_INTERNAL;
}

// Runs fn inside the library's exception boundary.
template <typename Fn>
auq_status guarded(Fn&& fn) {
  try {
    fn();
    return AUQ_OK;
  } catch (const auq::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AUQ_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return AUQ_ERROR_INTERNAL;
  }
}

auq_status bad_argument(const char* msg) {
  g_last_error = msg;
  return AUQ_ERROR_ARGUMENT;
}

bool scheme_from_int(int value, auq::Scheme* out) {
  switch (value) {
    case AUQ_SCHEME_CADMM: *out = auq::Scheme::cadmm; return true;
    case AUQ_SCHEME_RB: *out = auq::Scheme::rb; return true;
    case AUQ_SCHEME_AC: *out = auq::Scheme::ac; return true;
    case AUQ_SCHEME_AUQ: *out = auq::Scheme::auq; return true;
  }
  return false;
}

}  // namespace

extern "C" {

const char* auq_version(void) { return "0.1.0"; }

const char* auq_last_error(void) { return g_last_error.c_str(); }

void auq_solver_options_defaults(auq_solver_options* opts) {
  if (!opts) return;
  auq::SolverConfig d;
  opts->scheme = AUQ_SCHEME_AUQ;
  opts->rank = d.rank;
  opts->interval_low = d.interval_low;
  opts->interval_high = d.interval_high;
  opts->eps_abs = d.eps_abs;
  opts->eps_rel = d.eps_rel;
  opts->max_iter = d.max_iter;
  opts->rho0 = d.rho0;
  opts->seed = d.seed;
  opts->threads = d.threads;
  opts->weight_refresh_every = d.weight_refresh_every;
}

auq_status auq_dataset_load_idx(const char* images_path, const char* labels_path,
                                auq_dataset** out) {
  if (!images_path || !labels_path || !out) return bad_argument("null argument");
  return guarded([&] {
    auto* h = new auq_dataset{auq::load_idx(images_path, labels_path)};
    *out = h;
  });
}

auq_status auq_dataset_synth_blobs(int64_t dim, int classes, int64_t per_class,
                                   double noise, uint64_t seed, auq_dataset** out) {
  if (!out) return bad_argument("null out pointer");
  return guarded([&] {
    auto* h = new auq_dataset{auq::synth_blobs(dim, classes, per_class, noise, seed)};
    *out = h;
  });
}

auq_status auq_dataset_partition_by_class(const auq_dataset* d, int workers,
                                          int64_t per_class_cap,
                                          auq_dataset** shards_out) {
  if (!d || !shards_out) return bad_argument("null argument");
  return guarded([&] {
    std::vector<auq::Dataset> shards =
        auq::partition_by_class(d->d, workers, per_class_cap);
    for (size_t j = 0; j < shards.size(); ++j)
      shards_out[j] = new auq_dataset{std::move(shards[j])};
  });
}

auq_status auq_dataset_save_idx(const auq_dataset* d, const char* images_path,
                                const char* labels_path) {
  if (!d || !images_path || !labels_path) return bad_argument("null argument");
  return guarded([&] { auq::save_idx(d->d, images_path, labels_path); });
}

int64_t auq_dataset_size(const auq_dataset* d) { return d ? d->d.size() : 0; }
int64_t auq_dataset_dim(const auq_dataset* d) { return d ? d->d.dim() : 0; }
int auq_dataset_classes(const auq_dataset* d) { return d ? d->d.class_count : 0; }
void auq_dataset_free(auq_dataset* d) { delete d; }

}  // extern "C"

namespace {

// Validates the shard array and assembles a consensus problem; throws
// auq::Error on any defect so callers can stay inside guarded().
template <typename AddLoss>
void build_shard_problem(const auq_dataset* const* shards, int workers,
                         const auq::ProxRegularizer& reg, const AddLoss& add,
                         auq_problem** out) {
  auq::require(shards != nullptr && out != nullptr, auq::ErrorKind::argument,
               "null argument");
  auq::require(workers >= 1, auq::ErrorKind::argument, "workers must be >= 1");
  for (int j = 0; j < workers; ++j)
    auq::require(shards[j] != nullptr, auq::ErrorKind::argument, "null dataset shard");
  auq::ConsensusProblem p;
  p.regularizer = reg;
  for (int j = 0; j < workers; ++j) add(p, shards[j]->d);
  p.validate();
  *out = new auq_problem{std::move(p)};
}

}  // namespace

extern "C" {

auq_status auq_problem_elasticnet(const auq_dataset* const* shards, int workers,
                                  double rho1, double rho2, auq_problem** out) {
  return guarded([&] {
    build_shard_problem(
        shards, workers, auq::ProxRegularizer::elastic_net(rho1, rho2),
        [](auq::ConsensusProblem& p, const auq::Dataset& s) {
          auq::Vector y(s.size());
          for (Eigen::Index i = 0; i < s.size(); ++i)
            y[i] = static_cast<double>(s.labels[static_cast<size_t>(i)]);
          p.losses.push_back(std::make_shared<auq::ElasticNetLoss>(s.features, y));
        },
        out);
  });
}

auq_status auq_problem_multinomial(const auq_dataset* const* shards, int workers,
                                   double tikhonov_scale, auq_problem** out) {
  return guarded([&] {
    auq::require(shards != nullptr && workers >= 1 && shards[0] != nullptr,
                 auq::ErrorKind::argument, "null or empty shard list");
    int classes = shards[0]->d.class_count;
    build_shard_problem(
        shards, workers, auq::ProxRegularizer::tikhonov(tikhonov_scale),
        [classes](auq::ConsensusProblem& p, const auq::Dataset& s) {
          p.losses.push_back(
              std::make_shared<auq::MultinomialLoss>(s.features, s.labels, classes));
        },
        out);
  });
}

auq_status auq_problem_svm(const auq_dataset* const* shards, int workers,
                           double smoothing, double tikhonov_scale,
                           auq_problem** out) {
  return guarded([&] {
    auq::require(shards != nullptr && workers >= 1 && shards[0] != nullptr,
                 auq::ErrorKind::argument, "null or empty shard list");
    int threshold = (shards[0]->d.class_count + 1) / 2;
    build_shard_problem(
        shards, workers, auq::ProxRegularizer::tikhonov(tikhonov_scale),
        [threshold, smoothing](auq::ConsensusProblem& p, const auq::Dataset& s) {
          auq::Vector y(s.size());
          for (Eigen::Index i = 0; i < s.size(); ++i)
            y[i] = s.labels[static_cast<size_t>(i)] < threshold ? -1.0 : 1.0;
          p.losses.push_back(std::make_shared<auq::SmoothedSvmLoss>(
              auq::Matrix(s.features.transpose()), y, smoothing));
        },
        out);
  });
}

auq_status auq_problem_denoise_demo(int64_t side, double noise_sigma, double alpha,
                                    uint64_t seed, auq_problem** out) {
  if (!out) return bad_argument("null out pointer");
  return guarded([&] {
    auq::DenoiseInstance inst =
        auq::quadrant_denoise(auq::demo_image(side), noise_sigma, seed, alpha);
    *out = new auq_problem{std::move(inst.problem)};
  });
}

int64_t auq_problem_dim(const auq_problem* p) {
  return p && !p->p.losses.empty() ? p->p.dim() : 0;
}
int auq_problem_workers(const auq_problem* p) { return p ? p->p.workers() : 0; }
void auq_problem_free(auq_problem* p) { delete p; }

auq_status auq_solve(const auq_problem* p, const auq_solver_options* opts,
                     auq_trace** out) {
  if (!p || !opts || !out) return bad_argument("null argument");
  auq::SolverConfig sc;
  if (!scheme_from_int(opts->scheme, &sc.scheme))
    return bad_argument("unknown scheme value");
  sc.rank = opts->rank;
  sc.interval_low = opts->interval_low;
  sc.interval_high = opts->interval_high;
  sc.eps_abs = opts->eps_abs;
  sc.eps_rel = opts->eps_rel;
  sc.max_iter = opts->max_iter;
  sc.rho0 = opts->rho0;
  sc.seed = opts->seed;
  sc.threads = opts->threads;
  sc.weight_refresh_every = opts->weight_refresh_every;
  return guarded([&] {
    auq::RunResult r = auq::run(p->p, sc);
    *out = new auq_trace{std::move(r), p->p.dim()};
  });
}

int auq_trace_iterations(const auq_trace* t) { return t ? t->r.iterations : 0; }
int auq_trace_converged(const auq_trace* t) { return t && t->r.converged ? 1 : 0; }

auq_status auq_trace_record(const auq_trace* t, int index, auq_iteration* out) {
  if (!t || !out) return bad_argument("null argument");
  if (index < 0 || index >= static_cast<int>(t->r.trace.size()))
    return bad_argument("trace index out of range");
  const auq::TraceRecord& r = t->r.trace[static_cast<size_t>(index)];
  out->k = r.k;
  out->loss = r.loss;
  out->r_norm = r.r_norm;
  out->s_norm = r.s_norm;
  out->eps_primal = r.eps_primal;
  out->eps_dual = r.eps_dual;
  out->tnorm_step = r.tnorm_step;
  out->lemma41_ok = r.lemma41_ok ? 1 : 0;
  out->wall_ms = r.wall_ms;
  return AUQ_OK;
}

auq_status auq_trace_solution(const auq_trace* t, double* out, int64_t len) {
  if (!t || !out) return bad_argument("null argument");
  if (len != t->dim) return bad_argument("solution buffer has wrong length");
  std::memcpy(out, t->r.solution.data(), sizeof(double) * static_cast<size_t>(len));
  return AUQ_OK;
}

auq_status auq_trace_write_csv(const auq_trace* t, const char* path) {
  if (!t || !path) return bad_argument("null argument");
  return guarded([&] { auq::write_trace_csv(t->r.trace, path); });
}

void auq_trace_free(auq_trace* t) { delete t; }

auq_status auq_experiment_run(const char* config_path,
                              const char* out_dir_override, int threads) {
  if (!config_path) return bad_argument("null config path");
  return guarded([&] {
    auq::ExperimentConfig cfg = auq::parse_experiment_config(config_path);
    if (out_dir_override) cfg.out_dir = out_dir_override;
    auq::run_experiment(cfg, threads);
  });
}

auq_status auq_experiment_rank_sweep(const char* config_path, const int* ranks,
                                     int count, const char* out_dir_override,
                                     int threads) {
  if (!config_path || !ranks || count < 1)
    return bad_argument("null config path or empty rank list");
  return guarded([&] {
    auq::ExperimentConfig cfg = auq::parse_experiment_config(config_path);
    if (out_dir_override) cfg.out_dir = out_dir_override;
    auq::rank_sweep(cfg, std::vector<int>(ranks, ranks + count), threads);
  });
}

}  // extern "C"
