#include "tvopt/synthetic.hpp"

#include <cmath>

namespace tvopt {

double SyntheticCost::decay(double t) const {
  const double tau = t < jump_time_ ? 0.0 : jump_time_;
  return std::exp(-(t - tau));
}

double SyntheticCost::value(const Vector& x, double t) const {
  const double s = decay(t);
  const double lin = x(0) + x(1) - 0.01;
  return lin * lin + (1.0 + s) * x(1) * x(1) + s * x(0) * std::sin(2.0 * t);
}

Vector SyntheticCost::grad_x(const Vector& x, double t) const {
  const double s = decay(t);
  const double lin = x(0) + x(1) - 0.01;
  Vector g(2);
  g(0) = 2.0 * lin + s * std::sin(2.0 * t);
  g(1) = 2.0 * lin + 2.0 * (1.0 + s) * x(1);
  return g;
}

std::optional<double> SyntheticCost::grad_t(const Vector& x, double t) const {
  const double s = decay(t);
  return -s * x(1) * x(1) + s * x(0) * (2.0 * std::cos(2.0 * t) - std::sin(2.0 * t));
}

std::optional<Matrix> SyntheticCost::hessian(const Vector&, double t) const {
  const double s = decay(t);
  Matrix h(2, 2);
  h << 2.0, 2.0, 2.0, 2.0 + 2.0 * (1.0 + s);
  return h;
}

double SyntheticCost::exact_m() { return 3.0 - std::sqrt(5.0); }
double SyntheticCost::exact_M() { return 4.0 + 2.0 * std::sqrt(2.0); }

}  // namespace tvopt
