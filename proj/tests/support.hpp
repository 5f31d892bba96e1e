#pragma once

#include "tvopt/core.hpp"

#include <cmath>
#include <random>

// Test-side costs and finite-difference oracles. The differencing code here
// is intentionally separate from the library's validation path so the two can
// check each other.
namespace tvtest {

using tvopt::Matrix;
using tvopt::TimeVaryingCost;
using tvopt::Vector;

/// f(x, t) = (x - t)^2 in one dimension. The minimizer is x*(t) = t with
/// f*(t) = 0; second derivatives are m = M = 2, d(grad)/dt = -2, d2f/dt2 = 2.
class ScalarTrackingCost final : public TimeVaryingCost {
 public:
  int dimension() const override { return 1; }
  double value(const Vector& x, double t) const override {
    const double d = x(0) - t;
    return d * d;
  }
  Vector grad_x(const Vector& x, double t) const override {
    Vector g(1);
    g(0) = 2.0 * (x(0) - t);
    return g;
  }
  std::optional<double> grad_t(const Vector& x, double t) const override {
    return -2.0 * (x(0) - t);
  }
  std::optional<Matrix> hessian(const Vector&, double) const override {
    return Matrix::Constant(1, 1, 2.0);
  }
  bool has_grad_t() const override { return true; }
  bool has_hessian() const override { return true; }
};

/// f(x, t) = ||x - a||^2 + (d'x) t: linear in t, so d2f/dt2 == 0 and the
/// difference-based prediction reproduces the exact one.
class LinearInTimeCost final : public TimeVaryingCost {
 public:
  LinearInTimeCost(Vector a, Vector d) : a_(std::move(a)), d_(std::move(d)) {}

  int dimension() const override { return static_cast<int>(a_.size()); }
  double value(const Vector& x, double t) const override {
    return (x - a_).squaredNorm() + d_.dot(x) * t;
  }
  Vector grad_x(const Vector& x, double t) const override { return 2.0 * (x - a_) + t * d_; }
  std::optional<double> grad_t(const Vector& x, double) const override { return d_.dot(x); }
  std::optional<Matrix> hessian(const Vector&, double) const override {
    return Matrix(2.0 * Matrix::Identity(a_.size(), a_.size()));
  }
  bool has_grad_t() const override { return true; }
  bool has_hessian() const override { return true; }

 private:
  Vector a_, d_;
};

/// Static quadratic f(x) = x' A x / 2 + b'x, ignoring t.
class StaticQuadraticCost final : public TimeVaryingCost {
 public:
  StaticQuadraticCost(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {}

  int dimension() const override { return static_cast<int>(b_.size()); }
  double value(const Vector& x, double) const override {
    return 0.5 * x.dot(a_ * x) + b_.dot(x);
  }
  Vector grad_x(const Vector& x, double) const override { return a_ * x + b_; }
  std::optional<double> grad_t(const Vector&, double) const override { return 0.0; }
  std::optional<Matrix> hessian(const Vector&, double) const override { return a_; }
  bool has_grad_t() const override { return true; }
  bool has_hessian() const override { return true; }

 private:
  Matrix a_;
  Vector b_;
};

/// Wraps a cost and scales its reported gradient; a deliberately broken
/// implementation for negative tests.
class ScaledGradientCost final : public TimeVaryingCost {
 public:
  ScaledGradientCost(const TimeVaryingCost& inner, double factor)
      : inner_(inner), factor_(factor) {}

  int dimension() const override { return inner_.dimension(); }
  double value(const Vector& x, double t) const override { return inner_.value(x, t); }
  Vector grad_x(const Vector& x, double t) const override {
    return factor_ * inner_.grad_x(x, t);
  }
  bool has_grad_t() const override { return false; }

 private:
  const TimeVaryingCost& inner_;
  double factor_;
};

inline Vector fd_grad(const TimeVaryingCost& cost, const Vector& x, double t, double h = 1e-6) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (cost.value(xp, t) - cost.value(xm, t)) / (2.0 * h);
  }
  return g;
}

inline double fd_grad_t(const TimeVaryingCost& cost, const Vector& x, double t, double h = 1e-6) {
  return (cost.value(x, t + h) - cost.value(x, t - h)) / (2.0 * h);
}

inline Vector random_vector(std::mt19937_64& rng, int n, double box = 2.0) {
  std::uniform_real_distribution<double> u(-box, box);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

}  // namespace tvtest
