#include "CLI11.hpp"

#include "tvopt/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using tvopt::cli::Options;

struct FlagBundle {
  Options opts;
  std::string config_path;
  std::vector<std::string> algorithms;
  std::vector<double> x0;
  std::vector<long> jumps;
};

void add_common_options(CLI::App* cmd, FlagBundle& b) {
  cmd->add_option("--config", b.config_path, "config file with `key = value` lines");
  cmd->add_option("--problem", b.opts.problem,
                  "problem: synthetic | mpc | streaming-ls | custom-file");
  cmd->add_option("--alpha", b.opts.alpha, "correction step size");
  cmd->add_option("--delta", b.opts.delta, "sampling interval");
  cmd->add_option("--epsilon", b.opts.epsilon, "prediction gradient threshold");
  cmd->add_option("--t0", b.opts.t0, "start time");
  cmd->add_option("--steps", b.opts.steps, "number of steps");
  cmd->add_option("--seed", b.opts.seed, "generator seed");
  cmd->add_option("--x0", b.x0, "initial iterate, comma separated")->delimiter(',');
  cmd->add_option("--output", b.opts.output, "CSV output path (default: stdout)");
  cmd->add_option("--data-file", b.opts.data_file, "data rows for the custom-file problem");
  cmd->add_option("--dimension", b.opts.dimension, "streaming problem dimension");
  cmd->add_option("--window", b.opts.window, "sliding window length");
  cmd->add_option("--noise-sigma", b.opts.noise_sigma, "target noise level");
  cmd->add_option("--jumps", b.jumps, "regime-change indices, comma separated")->delimiter(',');
  cmd->add_option("--lambda", b.opts.lambda, "mpc control weight factor");
  cmd->add_option("--hp", b.opts.hp, "mpc prediction horizon");
  cmd->add_option("--hu", b.opts.hu, "mpc control horizon");
  cmd->add_option("--ref-amplitude", b.opts.ref_amplitude, "reference path amplitude");
  cmd->add_option("--ref-frequency", b.opts.ref_frequency, "reference path frequency");
}

template <typename T>
void overlay(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

// config file fills gaps; command-line flags win
int merge(const FlagBundle& flags, Options& merged, std::ostream& err) {
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) {
      err << "error: cannot open config file " << flags.config_path << "\n";
      return tvopt::cli::kExitConfig;
    }
    const std::string problem = merged.problem;
    if (const std::string msg = tvopt::cli::apply_config_file(in, merged); !msg.empty()) {
      err << "error: " << flags.config_path << ": " << msg << "\n";
      return tvopt::cli::kExitConfig;
    }
    if (!problem.empty()) merged.problem = problem;
  }

  const Options& f = flags.opts;
  if (!f.problem.empty()) merged.problem = f.problem;
  overlay(merged.alpha, f.alpha);
  overlay(merged.delta, f.delta);
  overlay(merged.epsilon, f.epsilon);
  overlay(merged.t0, f.t0);
  overlay(merged.steps, f.steps);
  overlay(merged.seed, f.seed);
  overlay(merged.output, f.output);
  overlay(merged.data_file, f.data_file);
  overlay(merged.dimension, f.dimension);
  overlay(merged.window, f.window);
  overlay(merged.noise_sigma, f.noise_sigma);
  overlay(merged.lambda, f.lambda);
  overlay(merged.hp, f.hp);
  overlay(merged.hu, f.hu);
  overlay(merged.ref_amplitude, f.ref_amplitude);
  overlay(merged.ref_frequency, f.ref_frequency);
  overlay(merged.m, f.m);
  overlay(merged.M, f.M);
  overlay(merged.K1, f.K1);
  overlay(merged.K2, f.K2);
  overlay(merged.K3, f.K3);
  overlay(merged.eps_lo, f.eps_lo);
  overlay(merged.eps_hi, f.eps_hi);
  overlay(merged.rank_from, f.rank_from);
  overlay(merged.rank_to, f.rank_to);
  if (!flags.algorithms.empty()) merged.algorithms = flags.algorithms;
  if (!flags.x0.empty()) merged.x0 = flags.x0;
  if (!flags.jumps.empty()) merged.jumps = flags.jumps;
  return tvopt::cli::kExitOk;
}

template <typename Fn>
int with_csv_stream(const Options& opts, std::ostream& err, Fn fn) {
  if (opts.output && !opts.output->empty()) {
    std::ofstream csv(*opts.output, std::ios::binary);
    if (!csv) {
      err << "error: cannot open output file " << *opts.output << "\n";
      return tvopt::cli::kExitConfig;
    }
    return fn(csv);
  }
  return fn(std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tvopt: tracking minimizers of streaming time-varying convex costs"};
  app.require_subcommand(1);

  FlagBundle run_flags, compare_flags, bounds_flags;

  CLI::App* run_cmd = app.add_subcommand("run", "run one algorithm, write a trajectory CSV");
  add_common_options(run_cmd, run_flags);
  run_cmd->add_option("--algorithm", run_flags.algorithms,
                      "gd | alg1 | alg2 | nesterov-v1 | nesterov-v2 | nlcg");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run several algorithms on the same problem instance");
  add_common_options(compare_cmd, compare_flags);
  compare_cmd->add_option("--algorithms", compare_flags.algorithms, "comma-separated list")
      ->delimiter(',');
  compare_cmd->add_option("--rank-from", compare_flags.opts.rank_from,
                          "first index of the ranking range");
  compare_cmd->add_option("--rank-to", compare_flags.opts.rank_to,
                          "last index of the ranking range");

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "print the tracking-bound report");
  add_common_options(bounds_cmd, bounds_flags);
  bounds_cmd->add_option("--m", bounds_flags.opts.m, "strong convexity constant");
  bounds_cmd->add_option("--M", bounds_flags.opts.M, "gradient Lipschitz constant");
  bounds_cmd->add_option("--K1", bounds_flags.opts.K1, "bound on |df/dt|");
  bounds_cmd->add_option("--K2", bounds_flags.opts.K2, "bound on ||d(grad f)/dt||");
  bounds_cmd->add_option("--K3", bounds_flags.opts.K3, "bound on |d2f/dt2|");
  bounds_cmd->add_option("--eps-lo", bounds_flags.opts.eps_lo, "epsilon search range start");
  bounds_cmd->add_option("--eps-hi", bounds_flags.opts.eps_hi, "epsilon search range end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return tvopt::cli::kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      Options opts;
      if (int rc = merge(run_flags, opts, std::cerr); rc != 0) return rc;
      return with_csv_stream(opts, std::cerr, [&](std::ostream& csv) {
        return tvopt::cli::cmd_run(opts, csv, std::cout, std::cerr);
      });
    }
    if (compare_cmd->parsed()) {
      Options opts;
      if (int rc = merge(compare_flags, opts, std::cerr); rc != 0) return rc;
      return with_csv_stream(opts, std::cerr, [&](std::ostream& csv) {
        return tvopt::cli::cmd_compare(opts, csv, std::cout, std::cerr);
      });
    }
    Options opts;
    if (int rc = merge(bounds_flags, opts, std::cerr); rc != 0) return rc;
    return tvopt::cli::cmd_bounds(opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
