#pragma once

#include "tvopt/core.hpp"

namespace tvopt {

/// Two-dimensional analytic benchmark cost
///   f(x, t) = (x1 + x2 - 0.01)^2 + (1 + e^{-(t - tau)}) * x2^2
///           + e^{-(t - tau)} * x1 * sin(2t),
/// where tau switches from 0 to `jump_time` at t = jump_time, re-arming the
/// decaying terms and producing a designed jump in the cost. All derivatives
/// are analytic; tau is piecewise constant, so the time derivative carries no
/// switching term and the jump shows up only between samples.
class SyntheticCost final : public TimeVaryingCost {
 public:
  explicit SyntheticCost(double jump_time = 45.0) : jump_time_(jump_time) {}

  int dimension() const override { return 2; }
  double value(const Vector& x, double t) const override;
  Vector grad_x(const Vector& x, double t) const override;
  std::optional<double> grad_t(const Vector& x, double t) const override;
  std::optional<Matrix> hessian(const Vector& x, double t) const override;
  bool has_grad_t() const override { return true; }
  bool has_hessian() const override { return true; }
  bool jump_between(double t_prev, double t_next) const override {
    return t_prev < jump_time_ && t_next >= jump_time_;
  }

  double jump_time() const { return jump_time_; }

  /// Exact curvature extremes over all t: the Hessian depends on t only
  /// through s = e^{-(t - tau)} in (0, 1], whose eigenvalue range is
  /// [3 - sqrt(5), 4 + 2*sqrt(2)].
  static double exact_m();
  static double exact_M();

 private:
  double decay(double t) const;  // e^{-(t - tau(t))}
  double jump_time_;
};

}  // namespace tvopt
