// Benchmark driver for the auqadmm shared library.  Talks to the library
// exclusively through the public C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "auqadmm.h"

namespace {

// Config, data and IO defects are usage problems (exit 1); solver-side
// failures are aborts (exit 2).
int exit_code_for(auq_status st) {
  switch (st) {
    case AUQ_OK:
      return 0;
    case AUQ_ERROR_ARGUMENT:
    case AUQ_ERROR_DATA:
    case AUQ_ERROR_IO:
    case AUQ_ERROR_CONFIG:
      return 1;
    default:
      return 2;
  }
}

int report(auq_status st) {
  if (st == AUQ_OK) return 0;
  std::fprintf(stderr, "error: %s\n", auq_last_error());
  return exit_code_for(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consensus solver benchmarks (auqadmm)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::vector<int> ranks;

  CLI::App* run = app.add_subcommand("run", "run every scheme a config selects");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--threads", threads, "worker threads (0 = single-threaded)");

  CLI::App* sweep =
      app.add_subcommand("rank-sweep", "repeat the weighted scheme across sketch ranks");
  sweep->add_option("config", config_path, "experiment config file")->required();
  sweep->add_option("--ranks", ranks, "comma-separated rank list")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "output directory (overrides the config)");
  sweep->add_option("--threads", threads, "worker threads (0 = single-threaded)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int st = app.exit(e);
    return st == 0 ? 0 : 1;
  }

  const char* out_override = out_dir.empty() ? nullptr : out_dir.c_str();
  if (app.got_subcommand(run))
    return report(auq_experiment_run(config_path.c_str(), out_override, threads));
  return report(auq_experiment_rank_sweep(config_path.c_str(), ranks.data(),
                                          static_cast<int>(ranks.size()),
                                          out_override, threads));
}
