#pragma once

#include "tvopt/core.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tvopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;

/// Everything the commands accept, before per-problem defaults are applied.
/// Unset fields fall back to the selected problem's defaults.
struct Options {
  std::string problem;                  // synthetic | mpc | streaming-ls | custom-file
  std::vector<std::string> algorithms;  // run uses the first entry

  std::optional<double> alpha;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> t0;
  std::optional<long> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> x0;

  std::optional<std::string> output;     // CSV destination; empty/absent means stdout
  std::optional<std::string> data_file;  // custom-file problem input

  // streaming problem
  std::optional<int> dimension;
  std::optional<int> window;
  std::optional<double> noise_sigma;
  std::optional<std::vector<long>> jumps;

  // mpc problem
  std::optional<double> lambda;
  std::optional<int> hp;
  std::optional<int> hu;
  std::optional<double> ref_amplitude;
  std::optional<double> ref_frequency;

  // bounds command
  std::optional<double> m;
  std::optional<double> M;
  std::optional<double> K1;
  std::optional<double> K2;
  std::optional<double> K3;
  std::optional<double> eps_lo;
  std::optional<double> eps_hi;

  // compare command
  std::optional<long> rank_from;
  std::optional<long> rank_to;
};

/// Applies `key = value` lines (with `#` comments) to unset fields of `opts`.
/// Returns an empty string on success, or a message naming the offending key
/// or line. Values already set in `opts` are not meant to be present here;
/// the caller layers command-line overrides on top afterwards.
std::string apply_config_file(std::istream& in, Options& opts);

/// Runs one algorithm on one problem, writing the trajectory CSV to `csv`
/// and a human-readable summary to `out`.
int cmd_run(const Options& opts, std::ostream& csv, std::ostream& out, std::ostream& err);

/// Runs each named algorithm on the identical problem instance, writing a
/// long-format CSV and a ranking by median gap over the chosen index range.
int cmd_compare(const Options& opts, std::ostream& csv, std::ostream& out, std::ostream& err);

/// Prints the tracking-bound report (key = value lines) for explicit or
/// estimated constants.
int cmd_bounds(const Options& opts, std::ostream& out, std::ostream& err);

/// 17-significant-digit decimal rendering used for every real in CSV and
/// report output; round-trips doubles losslessly.
std::string format_real(double v);

}  // namespace tvopt::cli
