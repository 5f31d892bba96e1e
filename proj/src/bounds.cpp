#include "tvopt/bounds.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace tvopt {

double psi(const ProblemConstants& c, double delta) {
  c.validate();
  if (delta < 0.0) throw std::domain_error("psi: delta must be nonnegative");
  return delta * (c.K1 + 0.5 * delta * c.K3) +
         c.K2 * c.K2 * delta * delta / (2.0 * c.m) * (c.M * delta / c.m + 2.0);
}

double gamma(const ProblemConstants& c, double delta, double epsilon) {
  c.validate();
  if (!(delta > 0.0) || !(epsilon > 0.0))
    throw std::domain_error("gamma: delta and epsilon must be positive");
  return 2.0 * c.K1 / delta + c.M / (2.0 * epsilon * epsilon) * c.K1 * c.K1 + 0.5 * c.K3 +
         c.K1 * c.K2 / epsilon;
}

double gamma_prime(const ProblemConstants& c, double delta, double epsilon) {
  c.validate();
  if (!(delta > 0.0) || !(epsilon > 0.0))
    throw std::domain_error("gamma_prime: delta and epsilon must be positive");
  return c.K3 + 2.0 * c.K1 / delta + c.K1 * c.K1 * c.M / (epsilon * epsilon) +
         c.K2 * (c.K1 + 0.5 * delta * c.K3) / epsilon +
         delta * delta * c.K3 * c.K3 * c.M / (4.0 * epsilon * epsilon);
}

double mu(const ProblemConstants& c, double delta) {
  c.validate();
  if (delta < 0.0) throw std::domain_error("mu: delta must be nonnegative");
  return c.K1 + 0.5 * delta * c.K3;
}

double kappa(double alpha, double M) {
  if (!(M > 0.0)) throw std::domain_error("kappa: M must be positive");
  if (alpha < 0.0 || alpha > 1.0 / (2.0 * M))
    throw std::domain_error("kappa: tracking bounds need 0 <= alpha <= 1/(2M)");
  return 1.0 - alpha * M / 2.0;
}

namespace {

double bound_terms(const ProblemConstants& c, double alpha, double delta, double epsilon,
                   long k, double initial_gap, BoundVariant variant, bool ultimate) {
  if (!(alpha > 0.0)) throw std::domain_error("tracking bound: alpha must be positive");
  const double g = variant == BoundVariant::Alg1 ? gamma(c, delta, epsilon)
                                                 : gamma_prime(c, delta, epsilon);
  const double kap = kappa(alpha, c.M);
  const double contraction = 1.0 - 2.0 * kap * alpha * c.m;
  const double ck = ultimate ? 0.0 : std::pow(contraction, static_cast<double>(k));
  const double denom = 4.0 * kap * kap * alpha * alpha * c.m;
  const double drift = std::max(g * delta * delta, mu(c, delta) * delta);
  return (1.0 - ck) / denom * psi(c, delta) + (1.0 - ck) / (denom * c.m) * drift +
         ck * initial_gap;
}

}  // namespace

double tracking_bound(const ProblemConstants& c, double alpha, double delta, double epsilon,
                     long k, double initial_gap, BoundVariant variant) {
  if (k < 0) throw std::domain_error("tracking_bound: k must be nonnegative");
  if (initial_gap < 0.0) throw std::domain_error("tracking_bound: initial_gap must be >= 0");
  return bound_terms(c, alpha, delta, epsilon, k, initial_gap, variant, false);
}

double ultimate_bound(const ProblemConstants& c, double alpha, double delta, double epsilon,
                      BoundVariant variant) {
  return bound_terms(c, alpha, delta, epsilon, 0, 0.0, variant, true);
}

EpsilonSearch optimal_epsilon(const ProblemConstants& c, double delta, double lo, double hi,
                              int grid_points) {
  c.validate();
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("optimal_epsilon: need 0 < lo < hi");
  if (grid_points < 2) throw std::invalid_argument("optimal_epsilon: need >= 2 grid points");

  const double mud = mu(c, delta) * delta;
  const auto imbalance = [&](double eps) { return gamma(c, delta, eps) * delta * delta - mud; };
  const auto objective = [&](double eps) {
    return std::max(gamma(c, delta, eps) * delta * delta, mud);
  };

  EpsilonSearch out;
  const double log_lo = std::log(lo);
  const double log_step = (std::log(hi) - log_lo) / (grid_points - 1);

  double best_val = objective(lo);
  double best_eps = lo;
  double max_abs_imbalance = 0.0;
  double prev_eps = lo;
  double prev_im = imbalance(lo);
  std::optional<std::pair<double, double>> bracket;
  for (int i = 0; i < grid_points; ++i) {
    const double eps = std::exp(log_lo + i * log_step);
    const double val = objective(eps);
    if (val < best_val) {
      best_val = val;
      best_eps = eps;
    }
    const double im = imbalance(eps);
    max_abs_imbalance = std::max(max_abs_imbalance, std::abs(im));
    if (i > 0 && !bracket && ((prev_im < 0.0 && im >= 0.0) || (prev_im > 0.0 && im <= 0.0)))
      bracket = {prev_eps, eps};
    prev_eps = eps;
    prev_im = im;
  }
  out.grid_epsilon = best_eps;
  out.grid_value = best_val;

  const double scale = std::max(mud, std::abs(gamma(c, delta, hi)) * delta * delta);
  if (max_abs_imbalance <= 1e-12 * std::max(1.0, scale)) {
    // the two sides agree identically; any epsilon solves the equation,
    // except in the fully static case where the equation is vacuous
    if (mud > 0.0) out.root = lo;
    return out;
  }
  if (bracket) {
    auto [a, b] = *bracket;
    double fa = imbalance(a);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = imbalance(mid);
      if ((fa < 0.0) == (fm < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    out.root = 0.5 * (a + b);
  }
  return out;
}

double BoundReport::per_step(long k, double initial_gap, BoundVariant variant) const {
  return tracking_bound(constants, alpha, delta, epsilon, k, initial_gap, variant);
}

BoundReport make_bound_report(const ProblemConstants& c, double alpha, double delta,
                              double epsilon, double eps_lo, double eps_hi) {
  BoundReport r;
  r.constants = c;
  r.alpha = alpha;
  r.delta = delta;
  r.epsilon = epsilon;
  r.psi = psi(c, delta);
  r.gamma = gamma(c, delta, epsilon);
  r.gamma_prime = gamma_prime(c, delta, epsilon);
  r.mu = mu(c, delta);
  r.kappa = kappa(alpha, c.M);
  r.contraction = 1.0 - 2.0 * r.kappa * alpha * c.m;
  r.ultimate_alg1 = ultimate_bound(c, alpha, delta, epsilon, BoundVariant::Alg1);
  r.ultimate_alg2 = ultimate_bound(c, alpha, delta, epsilon, BoundVariant::Alg2);
  r.epsilon_search = optimal_epsilon(c, delta, eps_lo, eps_hi);
  return r;
}

namespace {

Matrix fd_hessian(const TimeVaryingCost& cost, const Vector& x, double t) {
  const int n = cost.dimension();
  const double h = 1e-5 * (1.0 + x.lpNorm<Eigen::Infinity>());
  Matrix hess(n, n);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    hess.col(i) = (cost.grad_x(xp, t) - cost.grad_x(xm, t)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace

ProblemConstants estimate_constants(const TimeVaryingCost& cost, const Box& region, double t_lo,
                                    double t_hi, int samples, std::uint64_t seed) {
  const int n = cost.dimension();
  if (region.lo.size() != n || region.hi.size() != n)
    throw std::domain_error("estimate_constants: region dimension mismatch");
  if (!((region.hi - region.lo).minCoeff() > 0.0) || !(t_hi > t_lo))
    throw std::domain_error("estimate_constants: degenerate region");
  if (samples < 2) throw std::invalid_argument("estimate_constants: samples must be >= 2");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double m_min = std::numeric_limits<double>::infinity();
  double M_max = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0;

  for (int s = 0; s < samples; ++s) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = region.lo(i) + unit(rng) * (region.hi(i) - region.lo(i));
    double t = t_lo + unit(rng) * (t_hi - t_lo);
    const double margin = 1e-3 * (1.0 + std::abs(t_hi));
    for (int tries = 0; tries < 64 && cost.jump_between(t - margin, t + margin); ++tries)
      t = t_lo + unit(rng) * (t_hi - t_lo);

    const Matrix hess = cost.has_hessian() ? *cost.hessian(x, t) : fd_hessian(cost, x, t);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(hess);
    m_min = std::min(m_min, eig.eigenvalues().minCoeff());
    M_max = std::max(M_max, eig.eigenvalues().maxCoeff());

    const double ht = 1e-5 * (1.0 + std::abs(t));
    const double gt = cost.has_grad_t()
                          ? *cost.grad_t(x, t)
                          : (cost.value(x, t + ht) - cost.value(x, t - ht)) / (2.0 * ht);
    K1 = std::max(K1, std::abs(gt));
    K2 = std::max(K2, ((cost.grad_x(x, t + ht) - cost.grad_x(x, t - ht)) / (2.0 * ht)).norm());

    const double h2 = 1e-4 * (1.0 + std::abs(t));
    const double second =
        (cost.value(x, t + h2) - 2.0 * cost.value(x, t) + cost.value(x, t - h2)) / (h2 * h2);
    K3 = std::max(K3, std::abs(second));
  }

  ProblemConstants c;
  c.m = m_min;
  c.M = M_max;
  c.K1 = K1;
  c.K2 = K2;
  c.K3 = K3;
  c.empirical = true;
  c.validate();
  return c;
}

}  // namespace tvopt
