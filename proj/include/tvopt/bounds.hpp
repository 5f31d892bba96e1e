#pragma once

#include "tvopt/core.hpp"

#include <cstdint>
#include <optional>

namespace tvopt {

/// Bound on how much the optimal value can move across one sampling interval:
///   psi = delta*(K1 + delta/2*K3) + K2^2*delta^2/(2m) * (M*delta/m + 2).
double psi(const ProblemConstants& c, double delta);

/// Prediction-error constant of the exact-derivative algorithm:
///   gamma = 2*K1/delta + M*K1^2/(2*eps^2) + K3/2 + K1*K2/eps.
double gamma(const ProblemConstants& c, double delta, double epsilon);

/// Prediction-error constant of the difference-based algorithm:
///   gamma' = K3 + 2*K1/delta + K1^2*M/eps^2 + K2*(K1 + delta/2*K3)/eps
///          + delta^2*K3^2*M/(4*eps^2).
/// Always >= gamma for the same constants.
double gamma_prime(const ProblemConstants& c, double delta, double epsilon);

/// mu = K1 + delta/2 * K3, the value drift when the prediction is gated off.
double mu(const ProblemConstants& c, double delta);

/// kappa = 1 - alpha*M/2. Valid for 0 < alpha <= 1/(2M); outside that range
/// the tracking bounds do not apply and a domain error is thrown.
double kappa(double alpha, double M);

enum class BoundVariant { Alg1, Alg2 };

/// Tracking bound after k steps:
///   (1-c^k)/(4 kappa^2 alpha^2 m) * psi
/// + (1-c^k)/(4 kappa^2 alpha^2 m^2) * max(g*delta^2, mu*delta)
/// + c^k * initial_gap,
/// with c = 1 - 2*kappa*alpha*m and g = gamma (Alg1) or gamma' (Alg2).
/// Monotone in k toward ultimate_bound.
double tracking_bound(const ProblemConstants& c, double alpha, double delta, double epsilon,
                     long k, double initial_gap, BoundVariant variant);

/// k -> infinity limit of tracking_bound; the initialization error vanishes.
double ultimate_bound(const ProblemConstants& c, double alpha, double delta, double epsilon,
                      BoundVariant variant);

struct EpsilonSearch {
  /// Root of gamma(eps)*delta^2 == mu*delta in the search range, when one
  /// exists. For K1 > 0 the difference is strictly positive, so no root.
  std::optional<double> root;
  /// Fallback recommendation: argmin of max(gamma*delta^2, mu*delta) over a
  /// log-spaced grid on the range.
  double grid_epsilon = 0.0;
  double grid_value = 0.0;
};

/// Searches (lo, hi) for the threshold balancing the two prediction-error
/// terms. Bisection on a sign change of gamma*delta^2 - mu*delta; when the
/// two sides agree identically (K1 = 0 with K3 > 0), any epsilon is a root
/// and `lo` is returned.
EpsilonSearch optimal_epsilon(const ProblemConstants& c, double delta, double lo, double hi,
                              int grid_points = 200);

/// Everything the bound formulas produce for one (constants, alpha, delta,
/// epsilon) configuration, ready for reporting.
struct BoundReport {
  ProblemConstants constants;
  double alpha = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double psi = 0.0;
  double gamma = 0.0;
  double gamma_prime = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  double contraction = 0.0;  // 1 - 2*kappa*alpha*m
  double ultimate_alg1 = 0.0;
  double ultimate_alg2 = 0.0;
  EpsilonSearch epsilon_search;

  double per_step(long k, double initial_gap, BoundVariant variant) const;
};

BoundReport make_bound_report(const ProblemConstants& c, double alpha, double delta,
                              double epsilon, double eps_lo, double eps_hi);

/// Axis-aligned sampling region for empirical constant estimation.
struct Box {
  Vector lo;
  Vector hi;
};

/// Samples curvature extremes and time-derivative magnitudes over
/// region x [t_lo, t_hi] and returns conservative (extreme-over-samples)
/// constants, flagged as empirical. Hessians are used when the cost exposes
/// them and finite-differenced otherwise; all time derivatives that are not
/// analytic are finite-differenced.
ProblemConstants estimate_constants(const TimeVaryingCost& cost, const Box& region, double t_lo,
                                    double t_hi, int samples, std::uint64_t seed);

}  // namespace tvopt
