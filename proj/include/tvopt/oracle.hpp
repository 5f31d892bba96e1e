#pragma once

#include "tvopt/core.hpp"

#include <stdexcept>
#include <vector>

namespace tvopt {

/// Minimizer of x -> f(x, t) with t held fixed, plus the optimal value f*(t).
struct FrozenOptimum {
  Vector x_star;
  double f_star = 0.0;
  int iterations = 0;
  double residual = 0.0;  // ||grad_x f(x_star, t)||
};

/// Thrown when the Newton solve does not reach the residual tolerance.
/// Carries the last iterate so callers can inspect or re-seed.
class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, Vector last_iterate, double residual)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

  const Vector& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Vector last_iterate_;
  double residual_;
};

/// Damped Newton iterations on x -> f(x, t) until ||grad_x f|| <= tol.
/// Requires the cost to expose a Hessian. One iteration suffices for costs
/// quadratic in x, including rank-deficient ones (the Newton system is solved
/// in the least-squares sense).
FrozenOptimum frozen_optimum(const TimeVaryingCost& cost, double t, const Vector& x_init,
                             double tol = 1e-10, int max_iter = 100);

struct OdeSample {
  double t = 0.0;
  Vector x;
  double residual = 0.0;  // ||grad_x f(x, t)||, re-validated after integration
};

/// Integrates the optimal-trajectory flow dx*/dt = -H(x*, t)^{-1} d(grad_x f)/dt
/// forward from a point already optimal at t0 (residual <= 1e-8), emitting one
/// sample per `delta` interval with `substeps` Euler steps in between. The
/// cross derivative d(grad_x f)/dt is taken by central finite differences.
/// Throws when any emitted sample has optimality residual above 1e-3, which
/// signals stiffness or a trajectory discontinuity; integrate each smooth
/// segment separately.
std::vector<OdeSample> ode_trajectory(const TimeVaryingCost& cost, const Vector& x_star_0,
                                      double t0, double t1, double delta, int substeps);

struct GapMetrics {
  double gap = 0.0;    // f(x, t) - f*(t)
  double x_err = 0.0;  // ||x - x*(t)||
};

/// Tracking error of an iterate against a frozen-time optimum at the same t.
GapMetrics gap_metrics(const TimeVaryingCost& cost, const Vector& x, double t,
                       const FrozenOptimum& opt);

}  // namespace tvopt
