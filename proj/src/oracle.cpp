#include "tvopt/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace tvopt {

namespace {

Matrix require_hessian(const TimeVaryingCost& cost, const Vector& x, double t) {
  auto h = cost.hessian(x, t);
  if (!h) throw std::invalid_argument("oracle: cost does not expose a Hessian");
  return std::move(*h);
}

// Least-squares Newton direction; exact for nonsingular H and still well
// defined on rank-deficient quadratic slices (partially filled data windows).
Vector newton_direction(const Matrix& hess, const Vector& grad) {
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(hess).solve(-grad);
}

}  // namespace

FrozenOptimum frozen_optimum(const TimeVaryingCost& cost, double t, const Vector& x_init,
                             double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("frozen_optimum: tol must be positive");

  Vector x = x_init;
  double f = cost.value(x, t);
  Vector g = cost.grad_x(x, t);
  double res = g.norm();

  int iter = 0;
  while (res > tol) {
    if (iter >= max_iter) {
      std::ostringstream os;
      os << "frozen_optimum: no convergence after " << max_iter
         << " Newton iterations at t = " << t << " (residual " << res << ")";
      throw NewtonFailure(os.str(), x, res);
    }
    Vector step = newton_direction(require_hessian(cost, x, t), g);
    // halve while the value increases; 30 halvings at most
    double f_new = cost.value(x + step, t);
    for (int halvings = 0; halvings < 30 && f_new > f; ++halvings) {
      step *= 0.5;
      f_new = cost.value(x + step, t);
    }
    x += step;
    f = f_new;
    g = cost.grad_x(x, t);
    res = g.norm();
    ++iter;
  }

  return FrozenOptimum{std::move(x), f, iter, res};
}

std::vector<OdeSample> ode_trajectory(const TimeVaryingCost& cost, const Vector& x_star_0,
                                      double t0, double t1, double delta, int substeps) {
  if (!(delta > 0.0) || substeps < 1)
    throw std::invalid_argument("ode_trajectory: need delta > 0 and substeps >= 1");
  if (t1 < t0) throw std::invalid_argument("ode_trajectory: need t1 >= t0");
  const double res0 = cost.grad_x(x_star_0, t0).norm();
  if (res0 > 1e-8) {
    std::ostringstream os;
    os << "ode_trajectory: starting point is not optimal at t0 (residual " << res0 << ")";
    throw std::invalid_argument(os.str());
  }

  const auto cross_derivative = [&](const Vector& x, double t) {
    const double h = 1e-6 * (1.0 + std::abs(t));
    return Vector(((cost.grad_x(x, t + h) - cost.grad_x(x, t - h)) / (2.0 * h)).eval());
  };

  std::vector<OdeSample> samples;
  Vector x = x_star_0;
  samples.push_back({t0, x, res0});

  const auto intervals = static_cast<long>(std::ceil((t1 - t0) / delta - 1e-12));
  const double dt = delta / substeps;
  for (long i = 0; i < intervals; ++i) {
    for (int s = 0; s < substeps; ++s) {
      const double t = sample_time(t0, i, delta) + s * dt;
      const Matrix hess = require_hessian(cost, x, t);
      x += dt * Vector(Eigen::CompleteOrthogonalDecomposition<Matrix>(hess).solve(
                    -cross_derivative(x, t)));
    }
    const double t_next = sample_time(t0, i + 1, delta);
    const double res = cost.grad_x(x, t_next).norm();
    if (!(res <= 1e-3)) {
      std::ostringstream os;
      os << "ode_trajectory: optimality residual " << res << " at t = " << t_next
         << " exceeds 1e-3; increase substeps or split the integration at the discontinuity";
      throw std::runtime_error(os.str());
    }
    samples.push_back({t_next, x, res});
  }
  return samples;
}

GapMetrics gap_metrics(const TimeVaryingCost& cost, const Vector& x, double t,
                       const FrozenOptimum& opt) {
  return GapMetrics{cost.value(x, t) - opt.f_star, (x - opt.x_star).norm()};
}

}  // namespace tvopt
