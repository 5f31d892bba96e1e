#include "tvopt/cli.hpp"

#include "tvopt/bounds.hpp"
#include "tvopt/mpc.hpp"
#include "tvopt/oracle.hpp"
#include "tvopt/solvers.hpp"
#include "tvopt/streaming.hpp"
#include "tvopt/synthetic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

namespace tvopt::cli {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

constexpr const char* kCsvHeader =
    "k,t,algorithm,f_val,f_star,gap,grad_norm,x_err,pred_active,grad_evals\n";

std::string trim(std::string s) {
  const auto begin = s.find_first_not_of(" \t\r");
  const auto end = s.find_last_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_long(const std::string& s, long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

template <typename T, typename Parse>
bool parse_list(const std::string& s, std::vector<T>& out, Parse parse) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    T v;
    if (!parse(item, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

}  // namespace

std::string apply_config_file(std::istream& in, Options& opts) {
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) return "line " + std::to_string(line_no) + ": expected key = value";
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      return "line " + std::to_string(line_no) + ": expected key = value";

    const auto bad_value = [&] { return "invalid value for key '" + key + "': " + value; };

    const auto set_double = [&](std::optional<double>& slot) -> std::string {
      double v;
      if (!parse_double(value, v)) return bad_value();
      slot = v;
      return "";
    };
    const auto set_long = [&](std::optional<long>& slot) -> std::string {
      long v;
      if (!parse_long(value, v)) return bad_value();
      slot = v;
      return "";
    };
    const auto set_int = [&](std::optional<int>& slot) -> std::string {
      long v;
      if (!parse_long(value, v)) return bad_value();
      slot = static_cast<int>(v);
      return "";
    };

    std::string error;
    if (key == "problem") opts.problem = value;
    else if (key == "algorithm") opts.algorithms = {value};
    else if (key == "algorithms") {
      std::vector<std::string> names;
      if (!parse_list<std::string>(value, names,
                                   [](const std::string& s, std::string& v) {
                                     v = s;
                                     return !s.empty();
                                   }))
        return bad_value();
      opts.algorithms = std::move(names);
    } else if (key == "alpha") error = set_double(opts.alpha);
    else if (key == "delta") error = set_double(opts.delta);
    else if (key == "epsilon") error = set_double(opts.epsilon);
    else if (key == "t0") error = set_double(opts.t0);
    else if (key == "steps") error = set_long(opts.steps);
    else if (key == "seed") {
      long v;
      if (!parse_long(value, v) || v < 0) return bad_value();
      opts.seed = static_cast<std::uint64_t>(v);
    } else if (key == "x0") {
      std::vector<double> xs;
      if (!parse_list<double>(value, xs, parse_double)) return bad_value();
      opts.x0 = std::move(xs);
    } else if (key == "output") opts.output = value;
    else if (key == "data-file") opts.data_file = value;
    else if (key == "dimension") error = set_int(opts.dimension);
    else if (key == "window") error = set_int(opts.window);
    else if (key == "noise-sigma") error = set_double(opts.noise_sigma);
    else if (key == "jumps") {
      std::vector<long> js;
      if (!parse_list<long>(value, js, parse_long)) return bad_value();
      opts.jumps = std::move(js);
    } else if (key == "lambda") error = set_double(opts.lambda);
    else if (key == "hp") error = set_int(opts.hp);
    else if (key == "hu") error = set_int(opts.hu);
    else if (key == "ref-amplitude") error = set_double(opts.ref_amplitude);
    else if (key == "ref-frequency") error = set_double(opts.ref_frequency);
    else if (key == "m") error = set_double(opts.m);
    else if (key == "M") error = set_double(opts.M);
    else if (key == "K1") error = set_double(opts.K1);
    else if (key == "K2") error = set_double(opts.K2);
    else if (key == "K3") error = set_double(opts.K3);
    else if (key == "eps-lo") error = set_double(opts.eps_lo);
    else if (key == "eps-hi") error = set_double(opts.eps_hi);
    else if (key == "rank-from") error = set_long(opts.rank_from);
    else if (key == "rank-to") error = set_long(opts.rank_to);
    else return "unknown config key '" + key + "'";
    if (!error.empty()) return error;
  }
  return "";
}

namespace {

struct CsvRow {
  long k;
  double t;
  std::string algorithm;
  double f_val;
  std::optional<double> f_star;
  std::optional<double> gap;
  double grad_norm;
  std::optional<double> x_err;
  bool pred_active;
  long grad_evals;
};

void write_row(std::ostream& os, const CsvRow& r) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string{};
  };
  os << r.k << ',' << format_real(r.t) << ',' << r.algorithm << ',' << format_real(r.f_val)
     << ',' << opt(r.f_star) << ',' << opt(r.gap) << ',' << format_real(r.grad_norm) << ','
     << opt(r.x_err) << ',' << (r.pred_active ? 1 : 0) << ',' << r.grad_evals << '\n';
}

struct ResolvedRun {
  SolverConfig config;
  Vector x0;
  std::shared_ptr<const TimeVaryingCost> cost;  // null for mpc
  std::optional<MpcConfig> mpc;
  std::uint64_t seed = 1;
};

ProblemConstants streaming_curvature(const SlidingWindowLsCost& cost) {
  ProblemConstants c;
  c.m = std::numeric_limits<double>::infinity();
  c.M = 0.0;
  // full windows only; earlier ones are rank-deficient by construction
  for (long i = cost.window() - 1; i < cost.num_indices(); ++i) {
    const Matrix h = *cost.hessian(Vector::Zero(cost.dimension()), static_cast<double>(i));
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    c.m = std::min(c.m, eig.eigenvalues().minCoeff());
    c.M = std::max(c.M, eig.eigenvalues().maxCoeff());
  }
  c.m = std::max(c.m, 1e-12);
  c.empirical = true;
  return c;
}

int resolve_run(const Options& opts, Algorithm algorithm, ResolvedRun& run, std::ostream& err) {
  run.seed = opts.seed.value_or(1);
  SolverConfig& cfg = run.config;
  cfg.algorithm = algorithm;
  cfg.t0 = opts.t0.value_or(0.0);

  if (opts.problem == "synthetic") {
    cfg.alpha = opts.alpha.value_or(0.04);
    cfg.delta = opts.delta.value_or(0.1);
    cfg.epsilon = opts.epsilon.value_or(0.03);
    cfg.steps = opts.steps.value_or(900);
    run.cost = std::make_shared<SyntheticCost>();
    run.x0 = Vector(2);
    run.x0 << 0.1, 1.2;
    if (algorithm == Algorithm::NesterovV2) {
      ProblemConstants c;
      c.m = SyntheticCost::exact_m();
      c.M = SyntheticCost::exact_M();
      cfg.constants = c;
    }
  } else if (opts.problem == "streaming-ls" || opts.problem == "custom-file") {
    cfg.alpha = opts.alpha.value_or(0.1);
    cfg.delta = opts.delta.value_or(1.0);
    cfg.epsilon = opts.epsilon.value_or(0.01);
    std::shared_ptr<SlidingWindowLsCost> cost;
    if (opts.problem == "custom-file") {
      if (!opts.data_file) {
        err << "error: custom-file problem needs data-file\n";
        return kExitConfig;
      }
      const long min_rows = opts.steps ? *opts.steps : 1;
      cost = std::make_shared<SlidingWindowLsCost>(load_streaming_ls(
          *opts.data_file, opts.window.value_or(50), min_rows,
          opts.jumps.value_or(std::vector<long>{})));
      cfg.steps = opts.steps.value_or(cost->num_indices() - 1);
    } else {
      StreamingLsConfig scfg;
      scfg.dimension = opts.dimension.value_or(50);
      scfg.window = opts.window.value_or(50);
      scfg.steps = std::max<long>(opts.steps.value_or(950) + 1, 2);
      scfg.jump_indices = opts.jumps.value_or(std::vector<long>{250, 550});
      scfg.noise_sigma = opts.noise_sigma.value_or(0.01);
      scfg.seed = run.seed;
      cost = std::make_shared<SlidingWindowLsCost>(make_streaming_ls(scfg).cost);
      cfg.steps = opts.steps.value_or(950);
    }
    run.x0 = Vector::Zero(cost->dimension());
    if (algorithm == Algorithm::NesterovV2) cfg.constants = streaming_curvature(*cost);
    run.cost = cost;
  } else if (opts.problem == "mpc") {
    MpcConfig mc;
    mc.alpha = opts.alpha.value_or(0.01);
    mc.delta = opts.delta.value_or(0.1);
    mc.epsilon = opts.epsilon.value_or(0.1);
    mc.steps = opts.steps.value_or(1000);
    mc.lambda = opts.lambda.value_or(10.0);
    mc.Hp = opts.hp.value_or(10);
    mc.Hu = opts.hu.value_or(10);
    mc.ref_amplitude = opts.ref_amplitude.value_or(1.0);
    mc.ref_frequency = opts.ref_frequency.value_or(0.6283185307179586);
    mc.algorithm = algorithm;
    run.mpc = mc;
    cfg.alpha = mc.alpha;
    cfg.delta = mc.delta;
    cfg.epsilon = mc.epsilon;
    cfg.steps = mc.steps;
    return kExitOk;
  } else {
    err << "error: unknown problem '" << opts.problem
        << "' (expected synthetic | mpc | streaming-ls | custom-file)\n";
    return kExitConfig;
  }

  if (opts.x0) {
    run.x0 = Eigen::Map<const Vector>(opts.x0->data(), opts.x0->size());
    if (run.x0.size() != run.cost->dimension()) {
      err << "error: x0 has " << run.x0.size() << " entries, problem dimension is "
          << run.cost->dimension() << "\n";
      return kExitConfig;
    }
  }
  return kExitOk;
}

struct RunOutput {
  std::vector<CsvRow> rows;
  RunSummary summary;
  bool mpc = false;
};

int execute(const Options& opts, Algorithm algorithm, RunOutput& out, std::ostream& err) {
  const std::string name(algorithm_name(algorithm));
  try {
    ResolvedRun resolved;
    if (int rc = resolve_run(opts, algorithm, resolved, err); rc != kExitOk) return rc;
    if (resolved.mpc) {
      out.mpc = true;
      MpcSummary ms = run_mpc(*resolved.mpc, [&](const MpcStepRecord& r) {
        out.rows.push_back(CsvRow{r.k, r.t, name, r.f_val, r.f_star, r.gap, r.grad_norm,
                                  r.control_err, r.pred_active, r.grad_evals});
      });
      out.summary.steps_completed = ms.steps_completed;
      out.summary.diverged = ms.diverged;
      out.summary.diverged_at = ms.diverged_at;
      out.summary.final_gap = ms.final_gap;
      out.summary.grad_evals = ms.grad_evals;
      out.summary.initial_gap = out.rows.empty() ? 0.0 : out.rows.front().gap.value_or(0.0);
      out.summary.min_gap = out.summary.initial_gap;
      for (const CsvRow& r : out.rows)
        if (r.gap) out.summary.min_gap = std::min(out.summary.min_gap, *r.gap);
      for (double thr : {1e-1, 1e-2, 1e-3}) {
        long hit = -1;
        for (const CsvRow& r : out.rows)
          if (r.gap && *r.gap <= thr) {
            hit = r.k;
            break;
          }
        out.summary.steps_to_gap[thr] = hit;
      }
      return kExitOk;
    }

    // Warm-started Newton oracle that shrugs off solve failures: on rough
    // user data a window can be conditioned beyond what the tolerance allows,
    // and an empty gap column beats aborting the run.
    const OracleFn oracle = [cost = resolved.cost, warm = resolved.x0](
                                const Vector&, double t) mutable -> std::optional<FrozenOptimum> {
      try {
        FrozenOptimum opt = frozen_optimum(*cost, t, warm, 1e-9, 150);
        warm = opt.x_star;
        return opt;
      } catch (const NewtonFailure&) {
        return std::nullopt;
      }
    };
    out.summary = run(*resolved.cost, resolved.config, resolved.x0, oracle,
                      [&](const TrajectoryRecord& r) {
                        out.rows.push_back(CsvRow{r.k, r.t, name, r.f_val, r.f_star, r.gap,
                                                  r.grad_norm, r.x_err, r.pred_active,
                                                  r.grad_evals});
                      });
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

void write_summary(std::ostream& out, const std::string& name, const RunSummary& s) {
  out << "algorithm " << name << ": " << s.steps_completed << " steps";
  if (s.diverged) out << ", diverged at k = " << s.diverged_at;
  out << "\n";
  for (const auto& [thr, k] : s.steps_to_gap) {
    char short_thr[24];
    std::snprintf(short_thr, sizeof(short_thr), "%g", thr);
    out << "  steps to gap <= " << short_thr << ": ";
    if (k >= 0) out << k;
    else out << "never";
    out << "\n";
  }
  if (!std::isnan(s.final_gap)) out << "  final gap = " << format_real(s.final_gap) << "\n";
  out << "  gradient evaluations = " << s.grad_evals << "\n";
}

int check_common(const Options& opts, std::size_t min_algorithms, std::ostream& err) {
  if (opts.problem.empty()) {
    err << "error: no problem selected\n";
    return kExitConfig;
  }
  if (opts.algorithms.size() < min_algorithms) {
    err << "error: need at least " << min_algorithms << " algorithm(s)\n";
    return kExitConfig;
  }
  for (const std::string& name : opts.algorithms)
    if (!algorithm_from_name(name)) {
      err << "error: unknown algorithm '" << name
          << "' (expected gd | alg1 | alg2 | nesterov-v1 | nesterov-v2 | nlcg)\n";
      return kExitConfig;
    }
  return kExitOk;
}

}  // namespace

int cmd_run(const Options& opts, std::ostream& csv, std::ostream& out, std::ostream& err) {
  if (int rc = check_common(opts, 1, err); rc != kExitOk) return rc;
  const Algorithm algorithm = *algorithm_from_name(opts.algorithms.front());

  RunOutput result;
  if (int rc = execute(opts, algorithm, result, err); rc != kExitOk) return rc;

  csv << kCsvHeader;
  for (const CsvRow& r : result.rows) write_row(csv, r);
  write_summary(out, opts.algorithms.front(), result.summary);

  if (result.summary.diverged) {
    err << "error: run diverged at k = " << result.summary.diverged_at << "\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_compare(const Options& opts, std::ostream& csv, std::ostream& out, std::ostream& err) {
  if (int rc = check_common(opts, 2, err); rc != kExitOk) return rc;

  // merged deterministically by algorithm name order (stable for repeats)
  std::vector<std::string> names = opts.algorithms;
  std::stable_sort(names.begin(), names.end());

  std::vector<std::pair<std::string, RunOutput>> results;
  for (const std::string& name : names) {
    RunOutput result;
    if (int rc = execute(opts, *algorithm_from_name(name), result, err); rc != kExitOk)
      return rc;  // configuration problems abort; divergence does not
    results.emplace_back(name, std::move(result));
  }

  csv << kCsvHeader;
  for (const auto& [name, result] : results)
    for (const CsvRow& r : result.rows) write_row(csv, r);

  // ranking by median gap over the index range
  struct Entry {
    std::string name;
    double median;
    bool diverged;
  };
  std::vector<Entry> ranking;
  for (const auto& [name, result] : results) {
    std::vector<double> gaps;
    const long lo = opts.rank_from.value_or(0);
    const long hi = opts.rank_to.value_or(std::numeric_limits<long>::max());
    for (const CsvRow& r : result.rows)
      if (r.gap && r.k >= lo && r.k <= hi) gaps.push_back(*r.gap);
    double median = std::numeric_limits<double>::quiet_NaN();
    if (!gaps.empty()) {
      const auto mid = gaps.begin() + gaps.size() / 2;
      std::nth_element(gaps.begin(), mid, gaps.end());
      median = *mid;
    }
    ranking.push_back(Entry{name, median, result.summary.diverged});
  }
  std::sort(ranking.begin(), ranking.end(), [](const Entry& a, const Entry& b) {
    if (std::isnan(a.median)) return false;
    if (std::isnan(b.median)) return true;
    if (a.median != b.median) return a.median < b.median;
    return a.name < b.name;
  });

  out << "ranking by median gap";
  if (opts.rank_from || opts.rank_to)
    out << " over k in [" << opts.rank_from.value_or(0) << ", "
        << (opts.rank_to ? std::to_string(*opts.rank_to) : std::string("end")) << "]";
  out << ":\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out << "  " << (i + 1) << ". " << ranking[i].name << "  median_gap = "
        << format_real(ranking[i].median);
    if (ranking[i].diverged) out << "  (diverged)";
    out << "\n";
  }
  for (const auto& [name, result] : results) write_summary(out, name, result.summary);
  return kExitOk;
}

int cmd_bounds(const Options& opts, std::ostream& out, std::ostream& err) {
  ProblemConstants constants;
  const bool explicit_constants = opts.m && opts.M;
  try {
    if (explicit_constants) {
      constants.m = *opts.m;
      constants.M = *opts.M;
      constants.K1 = opts.K1.value_or(0.0);
      constants.K2 = opts.K2.value_or(0.0);
      constants.K3 = opts.K3.value_or(0.0);
      constants.validate();
    } else if (opts.problem == "synthetic") {
      const SyntheticCost cost;
      Box box{Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)};
      constants = estimate_constants(cost, box, 0.0, 10.0, 200, opts.seed.value_or(1));
    } else if (opts.problem == "streaming-ls") {
      StreamingLsConfig scfg;
      scfg.dimension = opts.dimension.value_or(50);
      scfg.window = opts.window.value_or(50);
      scfg.steps = opts.steps.value_or(950);
      scfg.noise_sigma = opts.noise_sigma.value_or(0.01);
      scfg.seed = opts.seed.value_or(1);
      const StreamingLsProblem problem = make_streaming_ls(scfg);
      const int n = problem.cost.dimension();
      Box box{Vector::Constant(n, -2.0), Vector::Constant(n, 2.0)};
      constants = estimate_constants(problem.cost, box, scfg.window,
                                     static_cast<double>(scfg.steps - 1), 200,
                                     opts.seed.value_or(1));
    } else if (opts.problem == "mpc") {
      MpcConfig mc;
      mc.lambda = opts.lambda.value_or(10.0);
      mc.Hp = opts.hp.value_or(10);
      mc.Hu = opts.hu.value_or(10);
      mc.delta = opts.delta.value_or(0.1);
      const UnicycleState state;
      const HorizonQpCost probe = mpc_horizon_cost(state, MpcAxis::X,
                                                   sine_reference(mc.delta), 0, mc.Hp, mc.Hu,
                                                   mc.lambda, mc.delta);
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(probe.hessian_matrix());
      constants.m = eig.eigenvalues().minCoeff();
      constants.M = eig.eigenvalues().maxCoeff();
    } else {
      err << "error: bounds needs explicit constants (m, M, K1, K2, K3) or a problem to "
             "estimate them from\n";
      return kExitConfig;
    }

    const double delta = opts.delta.value_or(0.1);
    const double epsilon = opts.epsilon.value_or(0.1);
    const double alpha = opts.alpha.value_or(1.0 / (2.0 * constants.M));
    if (!(alpha > 0.0) || alpha > 1.0 / (2.0 * constants.M)) {
      err << "error: tracking bounds require the step-size condition 0 < alpha <= 1/(2M); got "
             "alpha = "
          << format_real(alpha) << ", 1/(2M) = " << format_real(1.0 / (2.0 * constants.M))
          << "\n";
      return kExitConfig;
    }

    const BoundReport report = make_bound_report(constants, alpha, delta, epsilon,
                                                 opts.eps_lo.value_or(1e-4),
                                                 opts.eps_hi.value_or(10.0));
    out << "constants_source = " << (constants.empirical ? "estimated" : "exact") << "\n";
    out << "m = " << format_real(constants.m) << "\n";
    out << "M = " << format_real(constants.M) << "\n";
    out << "K1 = " << format_real(constants.K1) << "\n";
    out << "K2 = " << format_real(constants.K2) << "\n";
    out << "K3 = " << format_real(constants.K3) << "\n";
    out << "alpha = " << format_real(alpha) << "\n";
    out << "delta = " << format_real(delta) << "\n";
    out << "epsilon = " << format_real(epsilon) << "\n";
    out << "psi = " << format_real(report.psi) << "\n";
    out << "gamma = " << format_real(report.gamma) << "\n";
    out << "gamma_prime = " << format_real(report.gamma_prime) << "\n";
    out << "mu = " << format_real(report.mu) << "\n";
    out << "kappa = " << format_real(report.kappa) << "\n";
    out << "contraction = " << format_real(report.contraction) << "\n";
    out << "ultimate_alg1 = " << format_real(report.ultimate_alg1) << "\n";
    out << "ultimate_alg2 = " << format_real(report.ultimate_alg2) << "\n";
    out << "optimal_epsilon_root = "
        << (report.epsilon_search.root ? format_real(*report.epsilon_search.root)
                                       : std::string("none"))
        << "\n";
    out << "fallback_epsilon = " << format_real(report.epsilon_search.grid_epsilon) << "\n";
    out << "fallback_value = " << format_real(report.epsilon_search.grid_value) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace tvopt::cli
