#include "auq/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "auq/format.hpp"
#include "auq/losses.hpp"
#include "auq/rng.hpp"

namespace auq {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct ParseCursor {
  const std::string& name;
  int line = 0;
  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorKind::config, name + ":" + std::to_string(line) + ": " + msg);
  }
};

long long parse_int(const ParseCursor& at, const std::string& key,
                    const std::string& value) {
  long long out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    at.error("invalid integer for '" + key + "': '" + value + "'");
  return out;
}

std::uint64_t parse_u64(const ParseCursor& at, const std::string& key,
                        const std::string& value) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    at.error("invalid unsigned integer for '" + key + "': '" + value + "'");
  return out;
}

double parse_double(const ParseCursor& at, const std::string& key,
                    const std::string& value) {
  char* end = nullptr;
  double out = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty() || !std::isfinite(out))
    at.error("invalid number for '" + key + "': '" + value + "'");
  return out;
}

}  // namespace

const char* loss_kind_name(ExperimentConfig::LossKind k) {
  switch (k) {
    case ExperimentConfig::LossKind::elasticnet: return "elasticnet";
    case ExperimentConfig::LossKind::multinomial: return "multinomial";
    case ExperimentConfig::LossKind::svm: return "svm";
    case ExperimentConfig::LossKind::denoise_demo: return "denoise-demo";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  require(!schemes.empty(), ErrorKind::config, "config: no schemes selected");
  require(workers >= 1, ErrorKind::config, "config: workers must be >= 1");
  require(per_worker >= 1, ErrorKind::config, "config: per_worker must be >= 1");
  require(rank >= 1, ErrorKind::config, "config: rank must be >= 1");
  require(interval_low > 0.0 && interval_high >= interval_low, ErrorKind::config,
          "config: interval needs 0 < low <= high");
  require(eps_abs >= 0.0 && eps_rel >= 0.0 && (eps_abs > 0.0 || eps_rel > 0.0),
          ErrorKind::config, "config: tolerances must be nonnegative, one positive");
  require(max_iter >= 1, ErrorKind::config, "config: max_iter must be >= 1");
  require(rho0 > 0.0, ErrorKind::config, "config: rho0 must be positive");
  require(rho1 >= 0.0 && rho2 >= 0.0 && tikhonov >= 0.0, ErrorKind::config,
          "config: regularizer coefficients must be nonnegative");
  require(svm_eps > 0.0, ErrorKind::config, "config: svm_eps must be positive");
  require(denoise_alpha >= 0.0, ErrorKind::config,
          "config: denoise_alpha must be nonnegative");
  if (loss == LossKind::denoise_demo)
    require(data == DataKind::demo, ErrorKind::config,
            "config: loss denoise-demo requires data = demo");
  else
    require(data != DataKind::demo, ErrorKind::config,
            "config: data = demo only pairs with loss denoise-demo");
  if (data == DataKind::mnist)
    require(!mnist_images.empty() && !mnist_labels.empty(), ErrorKind::config,
            "config: data = mnist requires mnist_images and mnist_labels");
  if (data == DataKind::synth)
    require(synth_dim >= 1 && synth_classes >= 1 && synth_per_class >= 1 &&
                synth_noise >= 0.0,
            ErrorKind::config, "config: synth parameters must be positive");
  require(demo_side >= 2, ErrorKind::config, "config: demo_side must be >= 2");
}

ExperimentConfig parse_experiment_config_text(const std::string& text,
                                              const std::string& name) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  ParseCursor at{name, 0};
  while (std::getline(in, raw)) {
    ++at.line;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) at.error("expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) at.error("empty key");

    if (key == "loss") {
      if (value == "elasticnet") cfg.loss = ExperimentConfig::LossKind::elasticnet;
      else if (value == "multinomial") cfg.loss = ExperimentConfig::LossKind::multinomial;
      else if (value == "svm") cfg.loss = ExperimentConfig::LossKind::svm;
      else if (value == "denoise-demo") cfg.loss = ExperimentConfig::LossKind::denoise_demo;
      else at.error("unknown loss '" + value + "'");
    } else if (key == "data") {
      if (value == "synth") cfg.data = ExperimentConfig::DataKind::synth;
      else if (value == "mnist") cfg.data = ExperimentConfig::DataKind::mnist;
      else if (value == "demo") cfg.data = ExperimentConfig::DataKind::demo;
      else at.error("unknown data source '" + value + "'");
    } else if (key == "schemes") {
      cfg.schemes.clear();
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        item = trim(item);
        if (item.empty()) at.error("empty scheme name in list");
        Scheme s;
        if (!parse_scheme(item, &s)) at.error("unknown scheme '" + item + "'");
        cfg.schemes.push_back(s);
      }
      if (cfg.schemes.empty()) at.error("empty scheme list");
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_int(at, key, value));
    } else if (key == "per_worker") {
      cfg.per_worker = static_cast<Eigen::Index>(parse_int(at, key, value));
    } else if (key == "rank") {
      cfg.rank = static_cast<int>(parse_int(at, key, value));
    } else if (key == "interval_low") {
      cfg.interval_low = parse_double(at, key, value);
    } else if (key == "interval_high") {
      cfg.interval_high = parse_double(at, key, value);
    } else if (key == "eps_abs") {
      cfg.eps_abs = parse_double(at, key, value);
    } else if (key == "eps_rel") {
      cfg.eps_rel = parse_double(at, key, value);
    } else if (key == "max_iter") {
      cfg.max_iter = static_cast<int>(parse_int(at, key, value));
    } else if (key == "rho0") {
      cfg.rho0 = parse_double(at, key, value);
    } else if (key == "seed") {
      cfg.seed = parse_u64(at, key, value);
    } else if (key == "synth_dim") {
      cfg.synth_dim = static_cast<Eigen::Index>(parse_int(at, key, value));
    } else if (key == "synth_classes") {
      cfg.synth_classes = static_cast<int>(parse_int(at, key, value));
    } else if (key == "synth_per_class") {
      cfg.synth_per_class = static_cast<Eigen::Index>(parse_int(at, key, value));
    } else if (key == "synth_noise") {
      cfg.synth_noise = parse_double(at, key, value);
    } else if (key == "mnist_images") {
      cfg.mnist_images = value;
    } else if (key == "mnist_labels") {
      cfg.mnist_labels = value;
    } else if (key == "demo_side") {
      cfg.demo_side = static_cast<Eigen::Index>(parse_int(at, key, value));
    } else if (key == "demo_noise") {
      cfg.demo_noise = parse_double(at, key, value);
    } else if (key == "denoise_alpha") {
      cfg.denoise_alpha = parse_double(at, key, value);
    } else if (key == "rho1") {
      cfg.rho1 = parse_double(at, key, value);
    } else if (key == "rho2") {
      cfg.rho2 = parse_double(at, key, value);
    } else if (key == "tikhonov") {
      cfg.tikhonov = parse_double(at, key, value);
    } else if (key == "svm_eps") {
      cfg.svm_eps = parse_double(at, key, value);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else {
      at.error("unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::config, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_experiment_config_text(buf.str(), path);
}

ConsensusProblem build_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.loss == ExperimentConfig::LossKind::denoise_demo)
    return quadrant_denoise(demo_image(cfg.demo_side), cfg.demo_noise, cfg.seed,
                            cfg.denoise_alpha)
        .problem;

  Dataset full;
  if (cfg.data == ExperimentConfig::DataKind::synth)
    full = synth_blobs(cfg.synth_dim, cfg.synth_classes, cfg.synth_per_class,
                       cfg.synth_noise, derive_seed(cfg.seed, 5));
  else
    full = load_idx(cfg.mnist_images, cfg.mnist_labels);

  std::vector<Dataset> shards = partition_by_class(full, cfg.workers, cfg.per_worker);

  ConsensusProblem p;
  switch (cfg.loss) {
    case ExperimentConfig::LossKind::elasticnet: {
      for (Dataset& s : shards) {
        Vector y(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i)
          y[i] = static_cast<double>(s.labels[static_cast<size_t>(i)]);
        p.losses.push_back(
            std::make_shared<ElasticNetLoss>(std::move(s.features), std::move(y)));
      }
      p.regularizer = ProxRegularizer::elastic_net(cfg.rho1, cfg.rho2);
      break;
    }
    case ExperimentConfig::LossKind::multinomial: {
      for (Dataset& s : shards)
        p.losses.push_back(std::make_shared<MultinomialLoss>(
            std::move(s.features), std::move(s.labels), full.class_count));
      p.regularizer = ProxRegularizer::tikhonov(cfg.tikhonov);
      break;
    }
    case ExperimentConfig::LossKind::svm: {
      int threshold = (full.class_count + 1) / 2;
      for (Dataset& s : shards) {
        Vector y(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i)
          y[i] = s.labels[static_cast<size_t>(i)] < threshold ? -1.0 : 1.0;
        p.losses.push_back(std::make_shared<SmoothedSvmLoss>(
            Matrix(s.features.transpose()), std::move(y), cfg.svm_eps));
      }
      p.regularizer = ProxRegularizer::tikhonov(cfg.tikhonov);
      break;
    }
    case ExperimentConfig::LossKind::denoise_demo:
      break;  // handled above
  }
  return p;
}

namespace {

SolverConfig solver_config_for(const ExperimentConfig& cfg, Scheme scheme,
                               int rank, int threads) {
  SolverConfig sc;
  sc.scheme = scheme;
  sc.rank = rank;
  sc.interval_low = cfg.interval_low;
  sc.interval_high = cfg.interval_high;
  sc.eps_abs = cfg.eps_abs;
  sc.eps_rel = cfg.eps_rel;
  sc.max_iter = cfg.max_iter;
  sc.rho0 = cfg.rho0;
  sc.seed = cfg.seed;
  sc.threads = threads;
  return sc;
}

void write_summary(const std::string& path, const ExperimentConfig& cfg,
                   const std::vector<SchemeOutcome>& outcomes) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot open summary file: " + path);
  f << "loss,scheme,rank,iterations,converged,final_loss,wall_ms\n";
  for (const SchemeOutcome& o : outcomes) {
    f << loss_kind_name(cfg.loss) << ',' << scheme_name(o.scheme) << ',' << o.rank
      << ',' << o.iterations << ',' << (o.converged ? 1 : 0) << ','
      << format_double(o.final_loss) << ',' << format_double(o.wall_ms) << "\n";
  }
  f.flush();
  require(f.good(), ErrorKind::io, "failed writing summary file: " + path);
}

// Headerless single-column CSV; used for the demo's weight/image vectors.
void write_flat(const std::string& path, const Vector& x) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot open output file: " + path);
  for (Eigen::Index i = 0; i < x.size(); ++i) f << format_double(x[i]) << "\n";
  f.flush();
  require(f.good(), ErrorKind::io, "failed writing output file: " + path);
}

SchemeOutcome run_one(const ConsensusProblem& problem, const SolverConfig& sc,
                      const std::string& trace_path, RunResult* run_out) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult res = run(problem, sc);
  auto t1 = std::chrono::steady_clock::now();
  write_trace_csv(res.trace, trace_path);

  SchemeOutcome o;
  o.scheme = sc.scheme;
  o.rank = sc.scheme == Scheme::auq ? sc.rank : 0;
  o.iterations = res.iterations;
  o.converged = res.converged;
  o.final_loss = res.trace.empty() ? 0.0 : res.trace.back().loss;
  o.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  o.trace_path = trace_path;
  if (run_out) *run_out = std::move(res);
  return o;
}

void write_denoise_artifacts(const ExperimentConfig& cfg,
                             const std::filesystem::path& out, int threads) {
  DenoiseInstance inst = quadrant_denoise(demo_image(cfg.demo_side), cfg.demo_noise,
                                          cfg.seed, cfg.denoise_alpha);

  SolverConfig weighted = solver_config_for(cfg, Scheme::auq, cfg.rank, threads);
  weighted.max_iter = 1;
  RunResult wres = run(inst.problem, weighted);

  SolverConfig fixed = solver_config_for(cfg, Scheme::cadmm, cfg.rank, threads);
  fixed.max_iter = 1;
  RunResult ures = run(inst.problem, fixed);

  for (size_t j = 0; j < wres.first_weights.size(); ++j)
    write_flat(out / ("denoise-demo_weights_worker" + std::to_string(j) + ".csv"),
               wres.first_weights[j].d);
  write_flat(out / "denoise-demo_v1_weighted.csv", wres.solution);
  write_flat(out / "denoise-demo_v1_unweighted.csv", ures.solution);

  double n = static_cast<double>(inst.ground_truth.size());
  double mse_w = (wres.solution - inst.ground_truth).squaredNorm() / n;
  double mse_u = (ures.solution - inst.ground_truth).squaredNorm() / n;
  std::ofstream f(out / "denoise-demo_mse.csv", std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot open mse file");
  f << "variant,mse\n";
  f << "weighted," << format_double(mse_w) << "\n";
  f << "unweighted," << format_double(mse_u) << "\n";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  std::filesystem::path out(cfg.out_dir.empty() ? "." : cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  require(!ec, ErrorKind::io, "cannot create output directory: " + out.string());

  ConsensusProblem problem = build_problem(cfg);

  ExperimentResult result;
  for (Scheme s : cfg.schemes) {
    SolverConfig sc = solver_config_for(cfg, s, cfg.rank, threads);
    std::string trace_path =
        (out / (std::string(loss_kind_name(cfg.loss)) + "_" + scheme_name(s) + ".csv"))
            .string();
    RunResult res;
    result.outcomes.push_back(run_one(problem, sc, trace_path, &res));
    result.runs.push_back(std::move(res));
  }
  write_summary((out / "summary.csv").string(), cfg, result.outcomes);

  if (cfg.loss == ExperimentConfig::LossKind::denoise_demo)
    write_denoise_artifacts(cfg, out, threads);
  return result;
}

ExperimentResult rank_sweep(const ExperimentConfig& cfg,
                            const std::vector<int>& ranks, int threads) {
  cfg.validate();
  require(!ranks.empty(), ErrorKind::config, "rank sweep: no ranks given");
  for (int r : ranks)
    require(r >= 1, ErrorKind::config, "rank sweep: ranks must be >= 1");
  std::filesystem::path out(cfg.out_dir.empty() ? "." : cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  require(!ec, ErrorKind::io, "cannot create output directory: " + out.string());

  ConsensusProblem problem = build_problem(cfg);

  ExperimentResult result;
  for (int r : ranks) {
    SolverConfig sc = solver_config_for(cfg, Scheme::auq, r, threads);
    std::string trace_path =
        (out / (std::string(loss_kind_name(cfg.loss)) + "_auq_rank" +
                std::to_string(r) + ".csv"))
            .string();
    RunResult res;
    result.outcomes.push_back(run_one(problem, sc, trace_path, &res));
    result.runs.push_back(std::move(res));
  }
  write_summary((out / "summary.csv").string(), cfg, result.outcomes);

  std::ofstream f(out / "rank_diffs.csv", std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot open rank_diffs file");
  f << "rank_a,rank_b,rel_diff\n";
  for (size_t a = 0; a < result.outcomes.size(); ++a)
    for (size_t b = a + 1; b < result.outcomes.size(); ++b) {
      double fa = result.outcomes[a].final_loss;
      double fb = result.outcomes[b].final_loss;
      double scale = std::max({std::abs(fa), std::abs(fb), 1e-300});
      f << result.outcomes[a].rank << ',' << result.outcomes[b].rank << ','
        << format_double(std::abs(fa - fb) / scale) << "\n";
    }
  f.flush();
  require(f.good(), ErrorKind::io, "failed writing rank_diffs file");
  return result;
}

}  // namespace auq
