#pragma once

#include "tvopt/core.hpp"

#include <string>
#include <vector>

namespace tvopt {

/// Least-squares cost over a sliding window of streaming data rows.
///
/// Row j of `rows` is the data point revealed at time index j: features in
/// the first n columns, target in the last. At index k the cost is
///   f(x, k) = 1/(2W) * sum over the most recent min(k+1, W) rows of
///             (a_j' x - b_j)^2,
/// so the window holds exactly W rows once k >= W-1. The continuous t seen by
/// solvers maps to the nearest index (runs use delta = 1), and the value is
/// piecewise constant in t, so no analytic time derivative is exposed.
///
/// Per-index Gram caches are built incrementally at construction (one row in,
/// one row out), making evaluations O(n^2) and independent of the window
/// length.
class SlidingWindowLsCost final : public TimeVaryingCost {
 public:
  /// `rows` is R x (n+1). `jump_indices` marks time indices at which the
  /// generating process changed; solvers with memory reset there.
  SlidingWindowLsCost(Matrix rows, int window, std::vector<long> jump_indices = {});

  int dimension() const override { return static_cast<int>(rows_.cols()) - 1; }
  double value(const Vector& x, double t) const override;
  Vector grad_x(const Vector& x, double t) const override;
  std::optional<Matrix> hessian(const Vector& x, double t) const override;
  bool has_hessian() const override { return true; }
  bool jump_between(double t_prev, double t_next) const override;

  long num_indices() const { return rows_.rows(); }
  int window() const { return window_; }
  long index_of(double t) const;

  /// Recomputes the value by summing over the raw window rows, bypassing the
  /// incremental caches. Cross-check hook for tests.
  double value_direct(const Vector& x, long index) const;

 private:
  struct WindowCache {
    Matrix gram;   // sum a a'
    Vector atb;    // sum a b
    double btb;    // sum b^2
  };
  const WindowCache& cache_at(double t) const;

  Matrix rows_;
  int window_;
  std::vector<long> jump_indices_;
  std::vector<WindowCache> caches_;
};

struct StreamingLsConfig {
  int dimension = 50;
  int window = 50;
  long steps = 950;  // number of time indices to generate
  std::vector<long> jump_indices = {250, 550};
  double noise_sigma = 0.01;
  std::uint64_t seed = 1;
};

struct StreamingLsProblem {
  SlidingWindowLsCost cost;
  std::vector<Vector> regime_truth;  // generating coefficients, one per regime
};

/// Generates a regression stream whose ground-truth coefficients are
/// piecewise constant with changes at the jump indices. Features are i.i.d.
/// standard normal; targets carry Gaussian noise. Regime coefficients are
/// drawn with alternating standard deviations 1 and 3 so each jump moves the
/// solution substantially.
StreamingLsProblem make_streaming_ls(const StreamingLsConfig& config);

/// Reads a delimited-text stream (one `a_1,...,a_n,b` row per time index;
/// comma or whitespace separated, `#` comments) and wraps it as a
/// sliding-window cost. Throws std::runtime_error on malformed input or when
/// fewer than `min_rows` rows are present.
SlidingWindowLsCost load_streaming_ls(const std::string& path, int window, long min_rows = 1,
                                      std::vector<long> jump_indices = {});

}  // namespace tvopt
