#include "tvopt/solvers.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tvopt {

namespace {

constexpr double kDivergenceGuard = 1e12;

void require_finite(const Vector& g, const char* op, double t) {
  if (!g.allFinite()) {
    std::ostringstream os;
    os << op << ": non-finite gradient at t = " << t;
    throw std::runtime_error(os.str());
  }
}

}  // namespace

StepOutcome gd_step(const TimeVaryingCost& cost, const Vector& x, double t_next, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gd_step: alpha must be positive");
  const Vector g = cost.grad_x(x, t_next);
  require_finite(g, "gd_step", t_next);
  return StepOutcome{x, x - alpha * g, false};
}

Prediction alg1_predict(const TimeVaryingCost& cost, const Vector& x, double t, double delta,
                        double epsilon) {
  if (!(delta > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("alg1_predict: delta and epsilon must be positive");
  if (!cost.has_grad_t())
    throw std::invalid_argument(
        "alg1_predict: cost has no analytic time derivative; use the difference-based "
        "prediction (alg2)");

  const Vector g = cost.grad_x(x, t);
  require_finite(g, "alg1_predict", t);
  const double gnorm = g.norm();
  if (gnorm < epsilon) return Prediction{x, false};

  const double rate = *cost.grad_t(x, t);
  return Prediction{x - (delta * std::abs(rate) / (gnorm * gnorm)) * g, true};
}

Prediction alg2_predict(const TimeVaryingCost& cost, const Vector& x, double t, double t_prev,
                        double f_now, double f_prev, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("alg2_predict: epsilon must be positive");
  if (!(t > t_prev)) throw std::invalid_argument("alg2_predict: need t > t_prev");

  const Vector g = cost.grad_x(x, t);
  require_finite(g, "alg2_predict", t);
  const double gnorm = g.norm();
  if (gnorm < epsilon) return Prediction{x, false};

  // no explicit delta factor: the backward difference already spans the interval
  return Prediction{x - (std::abs(f_now - f_prev) / (gnorm * gnorm)) * g, true};
}

Vector correct(const TimeVaryingCost& cost, const Vector& x_pred, double t_next, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("correct: alpha must be positive");
  const Vector g = cost.grad_x(x_pred, t_next);
  require_finite(g, "correct", t_next);
  return x_pred - alpha * g;
}

namespace {

StepOutcome nesterov_step(const TimeVaryingCost& cost, SolverState& state, double t_next,
                          double alpha, double beta) {
  if (!state.momentum) state.momentum = state.x;
  const Vector y = state.x + beta * (state.x - *state.momentum);
  const Vector g = cost.grad_x(y, t_next);
  require_finite(g, "nesterov_step", t_next);
  StepOutcome out{state.x, y - alpha * g, false};
  state.momentum = state.x;
  return out;
}

}  // namespace

StepOutcome nesterov_v1_step(const TimeVaryingCost& cost, SolverState& state, double t_next,
                             double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("nesterov_v1_step: alpha must be positive");
  const double beta =
      std::max(0.0, (static_cast<double>(state.k) - 1.0) / (static_cast<double>(state.k) + 2.0));
  return nesterov_step(cost, state, t_next, alpha, beta);
}

StepOutcome nesterov_v2_step(const TimeVaryingCost& cost, SolverState& state, double t_next,
                             double alpha, const ProblemConstants& constants) {
  if (!(alpha > 0.0)) throw std::invalid_argument("nesterov_v2_step: alpha must be positive");
  constants.validate();
  const double sm = std::sqrt(constants.m);
  const double sM = std::sqrt(constants.M);
  return nesterov_step(cost, state, t_next, alpha, (sM - sm) / (sM + sm));
}

StepOutcome nlcg_step(const TimeVaryingCost& cost, SolverState& state, double t_next) {
  const Vector g = cost.grad_x(state.x, t_next);
  require_finite(g, "nlcg_step", t_next);
  const double gg = g.squaredNorm();
  if (gg == 0.0) {
    state.cg_dir = Vector::Zero(g.size());
    state.cg_grad_sq = 0.0;
    return StepOutcome{state.x, state.x, false};
  }

  const auto hess = cost.hessian(state.x, t_next);
  if (!hess)
    throw std::invalid_argument("nlcg_step: exact line search needs a quadratic cost (Hessian)");

  Vector d;
  if (state.cg_dir && state.cg_grad_sq > 0.0) {
    d = -g + (gg / state.cg_grad_sq) * *state.cg_dir;  // Fletcher-Reeves
  } else {
    d = -g;
  }
  double curvature = d.dot(*hess * d);
  if (!(curvature > 0.0)) {
    // non-convex slice along d; cannot occur for strongly convex costs
    d = -g;
    curvature = d.dot(*hess * d);
    if (!(curvature > 0.0)) return StepOutcome{state.x, state.x, false};
  }

  const double step = gg / curvature;
  StepOutcome out{state.x, state.x + step * d, false};
  state.cg_dir = std::move(d);
  state.cg_grad_sq = gg;
  return out;
}

OracleFn make_newton_oracle(const TimeVaryingCost& cost, Vector x_warm, double tol,
                            int max_iter) {
  return [&cost, warm = std::move(x_warm), tol, max_iter](const Vector&,
                                                          double t) mutable {
    FrozenOptimum opt = frozen_optimum(cost, t, warm, tol, max_iter);
    warm = opt.x_star;
    return std::optional<FrozenOptimum>(std::move(opt));
  };
}

RunSummary run(const TimeVaryingCost& cost, const SolverConfig& config, const Vector& x0,
               const OracleFn& oracle, const RecordSink& sink,
               const std::vector<double>& gap_thresholds) {
  config.validate();
  if (x0.size() != cost.dimension())
    throw std::invalid_argument("run: x0 dimension does not match the cost");
  if (config.algorithm == Algorithm::Alg1 && !cost.has_grad_t())
    throw std::invalid_argument(
        "run: alg1 needs an analytic time derivative; this cost provides none (use alg2)");

  CountingCost counted(cost);
  SolverState state;
  state.x = x0;
  state.x_pred = x0;
  state.t = config.t0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  RunSummary summary;
  summary.initial_gap = nan;
  summary.final_gap = nan;
  summary.min_gap = nan;
  for (double thr : gap_thresholds) summary.steps_to_gap[thr] = -1;

  const auto observe_gap = [&](long k, double gap) {
    if (std::isnan(summary.min_gap) || gap < summary.min_gap) summary.min_gap = gap;
    summary.final_gap = gap;
    for (auto& [thr, hit] : summary.steps_to_gap)
      if (hit < 0 && gap <= thr) hit = k;
  };

  // metrics at the initial point (not emitted as a record)
  {
    const double f0 = cost.value(x0, config.t0);
    summary.final_f = f0;
    summary.final_grad_norm = cost.grad_x(x0, config.t0).norm();
    if (oracle) {
      if (const auto opt0 = oracle(x0, config.t0)) {
        const GapMetrics m0 = gap_metrics(cost, x0, config.t0, *opt0);
        summary.initial_gap = m0.gap;
        observe_gap(0, m0.gap);
      }
    }
  }

  for (long k = 0; k < config.steps; ++k) {
    const double t_k = sample_time(config.t0, k, config.delta);
    const double t_next = sample_time(config.t0, k + 1, config.delta);
    const bool jump = cost.jump_between(t_k, t_next);
    state.k = k;
    state.t = t_k;

    StepOutcome outcome;
    switch (config.algorithm) {
      case Algorithm::GradientDescent:
        outcome = gd_step(counted, state.x, t_next, config.alpha);
        break;
      case Algorithm::Alg1: {
        const Prediction p =
            alg1_predict(counted, state.x, t_k, config.delta, config.epsilon);
        counted.value(p.x_pred, t_next);  // sample the newly revealed cost
        outcome = StepOutcome{p.x_pred, correct(counted, p.x_pred, t_next, config.alpha),
                              p.active};
        break;
      }
      case Algorithm::Alg2: {
        if (k == 0) {
          // no backward difference exists yet; bootstrap with a plain step
          outcome = gd_step(counted, state.x, t_next, config.alpha);
        } else {
          const double t_prev = sample_time(config.t0, k - 1, config.delta);
          const double f_now = counted.value(state.x, t_k);
          const double f_prev = counted.value(state.x, t_prev);
          state.f_prev = f_prev;
          const Prediction p =
              alg2_predict(counted, state.x, t_k, t_prev, f_now, f_prev, config.epsilon);
          counted.value(p.x_pred, t_next);
          outcome = StepOutcome{p.x_pred, correct(counted, p.x_pred, t_next, config.alpha),
                                p.active};
        }
        break;
      }
      case Algorithm::NesterovV1:
        if (jump) state.momentum = state.x;  // stale momentum is harmful across a jump
        outcome = nesterov_v1_step(counted, state, t_next, config.alpha);
        break;
      case Algorithm::NesterovV2:
        if (!config.constants)
          throw std::invalid_argument("run: nesterov-v2 needs curvature constants (m, M)");
        if (jump) state.momentum = state.x;
        outcome = nesterov_v2_step(counted, state, t_next, config.alpha, *config.constants);
        break;
      case Algorithm::NonlinearCG:
        if (jump) {
          state.cg_dir.reset();
          state.cg_grad_sq = 0.0;
        }
        outcome = nlcg_step(counted, state, t_next);
        break;
    }

    state.x_pred = outcome.x_pred;
    state.x = outcome.x_new;

    const double f = cost.value(state.x, t_next);
    const double grad_norm = cost.grad_x(state.x, t_next).norm();
    summary.final_f = f;
    summary.final_grad_norm = grad_norm;

    TrajectoryRecord rec;
    rec.k = k + 1;
    rec.t = t_next;
    rec.x = state.x;
    rec.f_val = f;
    rec.grad_norm = grad_norm;
    rec.pred_active = outcome.prediction_active;
    rec.grad_evals = counted.grad_evals();
    if (oracle) {
      if (const auto opt = oracle(state.x, t_next)) {
        const GapMetrics m = gap_metrics(cost, state.x, t_next, *opt);
        rec.f_star = opt->f_star;
        rec.gap = m.gap;
        rec.x_err = m.x_err;
        observe_gap(k + 1, m.gap);
      }
    }
    if (sink) sink(rec);
    summary.steps_completed = k + 1;

    if (!std::isfinite(f) || f > kDivergenceGuard) {
      summary.diverged = true;
      summary.diverged_at = k + 1;
      break;
    }
  }

  summary.grad_evals = counted.grad_evals();
  summary.value_evals = counted.value_evals();
  return summary;
}

}  // namespace tvopt
