#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tvopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Evaluation interface for a cost f(x, t) that drifts over time.
///
/// Evaluations are pure: they never mutate shared state, so one cost object
/// may be shared read-only across concurrent runs.
class TimeVaryingCost {
 public:
  virtual ~TimeVaryingCost() = default;

  virtual int dimension() const = 0;
  virtual double value(const Vector& x, double t) const = 0;
  virtual Vector grad_x(const Vector& x, double t) const = 0;

  /// Partial derivative in t, when the cost is analytic in time. Costs built
  /// from streaming data have no closed form here and return nullopt.
  virtual std::optional<double> grad_t(const Vector& /*x*/, double /*t*/) const {
    return std::nullopt;
  }

  /// Hessian in x. Used by the ground-truth oracle and the exact line-search
  /// baseline; the prediction-correction solvers never touch it.
  virtual std::optional<Matrix> hessian(const Vector& /*x*/, double /*t*/) const {
    return std::nullopt;
  }

  virtual bool has_grad_t() const { return false; }
  virtual bool has_hessian() const { return false; }

  /// True when the cost has a designed discontinuity inside (t_prev, t_next].
  /// Momentum-carrying solvers reset their memory across such a step.
  virtual bool jump_between(double /*t_prev*/, double /*t_next*/) const { return false; }
};

/// Curvature and smoothness constants of a cost: m-strong convexity,
/// M-Lipschitz gradient, and the time-smoothness bounds
/// K1 >= |df/dt|, K2 >= ||d(grad_x f)/dt||, K3 >= |d2f/dt2|.
struct ProblemConstants {
  double m = 1.0;
  double M = 1.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  bool empirical = false;  // produced by sampling rather than analysis

  /// Throws std::invalid_argument unless 0 < m <= M and K1, K2, K3 >= 0.
  void validate() const;
};

enum class Algorithm {
  GradientDescent,
  Alg1,  // prediction from the analytic time derivative of the cost
  Alg2,  // prediction from a backward difference of the cost value
  NesterovV1,
  NesterovV2,
  NonlinearCG,
};

/// Stable lowercase token for an algorithm ("gd", "alg1", ...), as used in
/// CSV output and on the command line.
std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

struct SolverConfig {
  Algorithm algorithm = Algorithm::GradientDescent;
  double alpha = 0.1;      // correction step size
  double delta = 0.1;      // sampling interval t_{k+1} - t_k
  double epsilon = 1e-2;   // gradient-norm threshold gating the prediction
  long steps = 100;
  double t0 = 0.0;
  std::optional<ProblemConstants> constants;  // required by nesterov-v2

  void validate() const;
};

/// Sample times are generated from the step index, never accumulated, so a
/// 10^4-step run carries no additive drift.
inline double sample_time(double t0, long k, double delta) {
  return t0 + static_cast<double>(k) * delta;
}

struct SolverState {
  Vector x;                          // current iterate
  Vector x_pred;                     // last predicted iterate
  long k = 0;
  double t = 0.0;
  std::optional<double> f_prev;      // f(x_k, t_{k-1}), difference-based prediction
  std::optional<Vector> momentum;    // previous iterate (Nesterov baselines)
  std::optional<Vector> cg_dir;      // previous search direction (nonlinear CG)
  double cg_grad_sq = 0.0;           // ||grad||^2 at the previous CG step
};

/// One logged point of a run. `gap`, `x_err` and `f_star` are present only
/// when the run was given a ground-truth oracle.
struct TrajectoryRecord {
  long k = 0;
  double t = 0.0;
  Vector x;
  double f_val = 0.0;
  double grad_norm = 0.0;
  std::optional<double> f_star;
  std::optional<double> gap;    // f(x, t) - f*(t)
  std::optional<double> x_err;  // ||x - x*(t)||
  bool pred_active = false;
  long grad_evals = 0;          // cumulative spatial-gradient evaluations charged to the solver
};

/// Forwards to an inner cost while counting evaluations. Wraps the cost a
/// solver sees so runs can report their first-order oracle budget; logging
/// and ground-truth computations go through the raw cost instead.
class CountingCost final : public TimeVaryingCost {
 public:
  explicit CountingCost(const TimeVaryingCost& inner) : inner_(inner) {}

  int dimension() const override { return inner_.dimension(); }
  double value(const Vector& x, double t) const override {
    ++value_evals_;
    return inner_.value(x, t);
  }
  Vector grad_x(const Vector& x, double t) const override {
    ++grad_evals_;
    return inner_.grad_x(x, t);
  }
  std::optional<double> grad_t(const Vector& x, double t) const override {
    ++grad_t_evals_;
    return inner_.grad_t(x, t);
  }
  std::optional<Matrix> hessian(const Vector& x, double t) const override {
    ++hessian_evals_;
    return inner_.hessian(x, t);
  }
  bool has_grad_t() const override { return inner_.has_grad_t(); }
  bool has_hessian() const override { return inner_.has_hessian(); }
  bool jump_between(double a, double b) const override { return inner_.jump_between(a, b); }

  long value_evals() const { return value_evals_; }
  long grad_evals() const { return grad_evals_; }
  long grad_t_evals() const { return grad_t_evals_; }
  long hessian_evals() const { return hessian_evals_; }

 private:
  const TimeVaryingCost& inner_;
  mutable long value_evals_ = 0;
  mutable long grad_evals_ = 0;
  mutable long grad_t_evals_ = 0;
  mutable long hessian_evals_ = 0;
};

struct ValidationReport {
  bool pass = false;
  int samples = 0;
  double max_rel_err_x = 0.0;
  std::optional<double> max_rel_err_t;  // present when the cost exposes grad_t
  std::string failure;                  // names the offending point on a non-finite hit
};

/// Checks analytic gradients against central finite differences of the value
/// at `samples` random points drawn deterministically from `seed`. Points are
/// sampled from [-x_box, x_box]^n x [0, t_max], stepping around designed
/// discontinuities. Passes when every relative error is within `tol`.
ValidationReport validate_cost(const TimeVaryingCost& cost, int samples, std::uint64_t seed,
                               double tol = 1e-5, double x_box = 2.0, double t_max = 50.0);

}  // namespace tvopt
