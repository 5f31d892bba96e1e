#pragma once

#include "tvopt/core.hpp"

#include <functional>
#include <utility>

namespace tvopt {

/// Unicycle pose plus the tracked head point offset by `b` along the heading.
/// The head point has integrator dynamics under the transformed inputs:
/// head advances by (delta*u1, delta*u2) each step.
struct UnicycleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double b = 0.2;

  double head_x() const;
  double head_y() const;
};

/// One Euler step of the head point. The heading follows the direction of
/// head motion (unchanged when the head does not move) and the body pose is
/// recovered from the head-point offset.
UnicycleState unicycle_advance(const UnicycleState& state, double u1, double u2, double delta);

/// Reference sampler: time index -> (r_x, r_y). Default path below; analytic,
/// so any horizon ahead of any k is available.
using ReferenceFn = std::function<std::pair<double, double>(long k)>;

/// r_x(k) = delta*k, r_y(k) = amplitude * sin(frequency * r_x(k)).
ReferenceFn sine_reference(double delta, double amplitude = 1.0,
                           double frequency = 0.6283185307179586 /* pi/5 */);

/// Receding-horizon tracking cost for one axis, as a frozen quadratic in the
/// control sequence u in R^{Hu}:
///   J(u) = sum_{i=0}^{Hp-1} (r(k+i) - h(k+i))^2 + (1/lambda) * sum u_i^2,
/// with h(k+i) = h(k) + delta * sum_{j<i} u_j. The i = 0 term does not depend
/// on u. Controls beyond Hu are held at zero. The Hessian is constant across
/// steps (it depends only on delta, lambda and the horizons), and there is no
/// analytic time derivative: successive instances are distinct costs, which
/// is exactly the streaming setting of the difference-based predictor.
class HorizonQpCost final : public TimeVaryingCost {
 public:
  /// `reference` holds the Hp samples r(k), ..., r(k+Hp-1) for this axis.
  HorizonQpCost(double head, Vector reference, double lambda, double delta, int control_horizon);

  int dimension() const override { return static_cast<int>(hess_.rows()); }
  double value(const Vector& u, double /*t*/) const override;
  Vector grad_x(const Vector& u, double /*t*/) const override;
  std::optional<Matrix> hessian(const Vector& /*u*/, double /*t*/) const override { return hess_; }
  bool has_hessian() const override { return true; }

  /// Exact minimizer via the normal equations.
  Vector solve_exact() const;
  const Matrix& hessian_matrix() const { return hess_; }

 private:
  Vector residual_offset_;  // r - h(k) * 1
  Matrix sensitivity_;      // Hp x Hu map from controls to head displacement
  Matrix hess_;
  double lambda_;
};

enum class MpcAxis { X, Y };

/// Builds the per-axis horizon cost at step k from the current robot state
/// and a reference sampler. Throws std::invalid_argument when the sampler is
/// a finite table shorter than k + Hp (signalled by it throwing).
HorizonQpCost mpc_horizon_cost(const UnicycleState& state, MpcAxis axis,
                               const ReferenceFn& reference, long k, int Hp, int Hu,
                               double lambda, double delta);

struct MpcConfig {
  // Divisor of the control penalty: the horizon cost carries (1/lambda)*|u|^2.
  // The default weight 1/lambda = 0.1 is the setting under which the
  // difference-based predictor separates from plain gradient descent; large
  // weights make the QP nearly isotropic and every first-order method
  // converges in a handful of steps.
  double lambda = 10.0;
  int Hp = 10;
  int Hu = 10;
  double delta = 0.1;
  double alpha = 0.01;
  double epsilon = 0.1;
  long steps = 1000;
  Algorithm algorithm = Algorithm::Alg2;
  double x0 = -100.0;
  double y0 = -100.0;
  double theta0 = 0.0;
  double b = 0.2;
  double u_init = 1.0;  // initial value of every control in both horizons
  double ref_amplitude = 1.0;
  double ref_frequency = 0.6283185307179586;  // pi/5

  void validate() const;
};

/// Per-step log of the closed loop. Costs and errors aggregate both axes;
/// `u*` is the exact minimizer of the same step's horizon costs.
struct MpcStepRecord {
  long k = 0;
  double t = 0.0;
  double u1_applied = 0.0;
  double u2_applied = 0.0;
  double u1_star = 0.0;
  double u2_star = 0.0;
  double control_err = 0.0;  // ||(u1 - u1*, u2 - u2*)|| over the applied controls
  double f_val = 0.0;        // J1 + J2 at the current iterates
  double f_star = 0.0;       // J1* + J2*
  double gap = 0.0;
  double grad_norm = 0.0;    // joint norm over both axes
  double head_x = 0.0;
  double head_y = 0.0;
  bool pred_active = false;
  long grad_evals = 0;
};

using MpcRecordSink = std::function<void(const MpcStepRecord&)>;

struct MpcSummary {
  long steps_completed = 0;
  bool diverged = false;
  long diverged_at = -1;
  double final_control_err = 0.0;
  double final_gap = 0.0;
  long grad_evals = 0;
  /// Exact curvature constants of the (constant) per-axis Hessian.
  ProblemConstants qp_constants;
};

/// Runs the closed loop: at each step the per-axis horizon costs are built
/// from the robot state, the first controls of the current iterates are
/// executed, and each axis's control sequence takes one solver update against
/// the newly revealed costs. The difference-based prediction compares the
/// previous step's cost with the current one at the same iterate.
MpcSummary run_mpc(const MpcConfig& config, const MpcRecordSink& sink = nullptr);

}  // namespace tvopt
