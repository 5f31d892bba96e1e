#include "tvopt/core.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tvopt {

void ProblemConstants::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument("ProblemConstants: m must be positive");
  if (!(M >= m)) throw std::invalid_argument("ProblemConstants: need m <= M");
  if (K1 < 0.0 || K2 < 0.0 || K3 < 0.0)
    throw std::invalid_argument("ProblemConstants: K1, K2, K3 must be nonnegative");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::GradientDescent: return "gd";
    case Algorithm::Alg1: return "alg1";
    case Algorithm::Alg2: return "alg2";
    case Algorithm::NesterovV1: return "nesterov-v1";
    case Algorithm::NesterovV2: return "nesterov-v2";
    case Algorithm::NonlinearCG: return "nlcg";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
  if (name == "gd" || name == "gradient-descent") return Algorithm::GradientDescent;
  if (name == "alg1") return Algorithm::Alg1;
  if (name == "alg2") return Algorithm::Alg2;
  if (name == "nesterov-v1") return Algorithm::NesterovV1;
  if (name == "nesterov-v2") return Algorithm::NesterovV2;
  if (name == "nlcg") return Algorithm::NonlinearCG;
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("SolverConfig: alpha must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("SolverConfig: delta must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be positive");
  if (steps < 0) throw std::invalid_argument("SolverConfig: steps must be nonnegative");
  if (t0 < 0.0) throw std::invalid_argument("SolverConfig: t0 must be nonnegative");
  if (constants) constants->validate();
}

namespace {

std::string point_string(const Vector& x, double t) {
  std::ostringstream os;
  os << "x = [" << x.transpose() << "], t = " << t;
  return os.str();
}

}  // namespace

ValidationReport validate_cost(const TimeVaryingCost& cost, int samples, std::uint64_t seed,
                               double tol, double x_box, double t_max) {
  if (samples < 1) throw std::invalid_argument("validate_cost: samples must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-x_box, x_box);
  std::uniform_real_distribution<double> ut(0.0, t_max);

  const int n = cost.dimension();
  ValidationReport report;
  report.samples = samples;
  if (cost.has_grad_t()) report.max_rel_err_t = 0.0;

  for (int s = 0; s < samples; ++s) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = ux(rng);
    double t = ut(rng);
    // step clear of designed discontinuities so the differences stay one-sided
    for (int tries = 0; tries < 64 && cost.jump_between(t - 1e-3, t + 1e-3); ++tries) t = ut(rng);

    const double f = cost.value(x, t);
    const Vector g = cost.grad_x(x, t);
    if (!std::isfinite(f) || !g.allFinite()) {
      report.failure = "non-finite value or gradient at " + point_string(x, t);
      report.pass = false;
      return report;
    }

    const double h = 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double fd = (cost.value(xp, t) - cost.value(xm, t)) / (2.0 * h);
      const double rel = std::abs(fd - g(i)) / std::max(1.0, std::abs(g(i)));
      report.max_rel_err_x = std::max(report.max_rel_err_x, rel);
    }

    if (cost.has_grad_t()) {
      const auto gt = cost.grad_t(x, t);
      if (!gt || !std::isfinite(*gt)) {
        report.failure = "non-finite time derivative at " + point_string(x, t);
        report.pass = false;
        return report;
      }
      const double ht = 1e-6 * (1.0 + std::abs(t));
      const double fd = (cost.value(x, t + ht) - cost.value(x, t - ht)) / (2.0 * ht);
      const double rel = std::abs(fd - *gt) / std::max(1.0, std::abs(*gt));
      report.max_rel_err_t = std::max(*report.max_rel_err_t, rel);
    }
  }

  report.pass = report.max_rel_err_x <= tol &&
                (!report.max_rel_err_t || *report.max_rel_err_t <= tol);
  return report;
}

}  // namespace tvopt
