#pragma once

#include "tvopt/core.hpp"
#include "tvopt/oracle.hpp"

#include <functional>
#include <map>
#include <vector>

namespace tvopt {

/// Result of one predict-then-correct (or baseline) step.
struct StepOutcome {
  Vector x_pred;
  Vector x_new;
  bool prediction_active = false;  // whether the ||grad|| >= epsilon branch fired
};

struct Prediction {
  Vector x_pred;
  bool active = false;
};

/// Plain gradient step on the cost frozen at the incoming sample time:
/// x_new = x - alpha * grad_x f(x, t_next). The predicted point is x itself.
StepOutcome gd_step(const TimeVaryingCost& cost, const Vector& x, double t_next, double alpha);

/// Prediction from the analytic time derivative. When ||grad_x f(x, t)|| >= epsilon,
/// moves along -grad_x f by delta * |grad_t f| / ||grad_x f||; otherwise stays put.
/// Requires the cost to expose grad_t; use alg2_predict when it does not.
Prediction alg1_predict(const TimeVaryingCost& cost, const Vector& x, double t, double delta,
                        double epsilon);

/// Prediction from a backward difference of the cost value. `f_now` and
/// `f_prev` must be f(x, t) and f(x, t_prev); the displacement magnitude is
/// |f_now - f_prev| / ||grad_x f(x, t)||, the interval length being embedded
/// in the difference itself.
Prediction alg2_predict(const TimeVaryingCost& cost, const Vector& x, double t, double t_prev,
                        double f_now, double f_prev, double epsilon);

/// Correction: gradient step on the cost frozen at t_next, taken from the
/// predicted point. With alpha <= 1/(2M) the step never increases the
/// frozen-time value.
Vector correct(const TimeVaryingCost& cost, const Vector& x_pred, double t_next, double alpha);

/// Accelerated baseline, momentum coefficient (k-1)/(k+2). One update per
/// time index; the gradient is taken at the extrapolated point on the cost
/// frozen at t_next. state.momentum holds the previous iterate.
StepOutcome nesterov_v1_step(const TimeVaryingCost& cost, SolverState& state, double t_next,
                             double alpha);

/// Accelerated baseline with the constant momentum coefficient
/// (sqrt(M) - sqrt(m)) / (sqrt(M) + sqrt(m)) from the curvature constants.
StepOutcome nesterov_v2_step(const TimeVaryingCost& cost, SolverState& state, double t_next,
                             double alpha, const ProblemConstants& constants);

/// Fletcher-Reeves nonlinear conjugate gradient with the exact line search
/// step (g'g)/(d'Hd) available on quadratic slices. Falls back to steepest
/// descent when the curvature along the direction is not positive.
StepOutcome nlcg_step(const TimeVaryingCost& cost, SolverState& state, double t_next);

/// Ground truth callback: frozen-time optimum at t (typically Newton-based
/// and warm-started). Used for per-step gap logging. Returning nullopt leaves
/// that record's gap fields empty instead of aborting the run.
using OracleFn = std::function<std::optional<FrozenOptimum>(const Vector& x, double t)>;

/// Warm-started Newton oracle over `cost`, seeded at `x_warm`. Stateful: each
/// call re-seeds from the previously found optimum, so use one instance per
/// run. Solve failures propagate as NewtonFailure; wrap the call when a run
/// over rough data should survive them.
OracleFn make_newton_oracle(const TimeVaryingCost& cost, Vector x_warm, double tol = 1e-10,
                            int max_iter = 100);

using RecordSink = std::function<void(const TrajectoryRecord&)>;

struct RunSummary {
  long steps_completed = 0;
  bool diverged = false;
  long diverged_at = -1;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  double initial_gap = 0.0;                // NaN when no oracle
  double final_gap = 0.0;                  // NaN when no oracle
  double min_gap = 0.0;                    // NaN when no oracle
  std::map<double, long> steps_to_gap;     // threshold -> first k with gap <= threshold, -1 if never
  long grad_evals = 0;                     // spatial-gradient evaluations charged to the solver
  long value_evals = 0;
};

/// Drives `config.steps` predict-then-correct (or baseline) updates from x0,
/// sampling the cost at t_k = t0 + k*delta. Emits one TrajectoryRecord per
/// completed step (k = 1..steps) to `sink`; gap metrics are filled when an
/// oracle is supplied. A run whose value exceeds 1e12 (or goes non-finite) is
/// marked diverged and stopped rather than raised, so comparative sweeps
/// complete.
RunSummary run(const TimeVaryingCost& cost, const SolverConfig& config, const Vector& x0,
               const OracleFn& oracle = nullptr, const RecordSink& sink = nullptr,
               const std::vector<double>& gap_thresholds = {1e-1, 1e-2, 1e-3});

}  // namespace tvopt
