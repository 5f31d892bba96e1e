#include "tvopt/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tvopt {

SlidingWindowLsCost::SlidingWindowLsCost(Matrix rows, int window,
                                         std::vector<long> jump_indices)
    : rows_(std::move(rows)), window_(window), jump_indices_(std::move(jump_indices)) {
  if (rows_.rows() < 1 || rows_.cols() < 2)
    throw std::invalid_argument("SlidingWindowLsCost: need at least one row and one feature");
  if (window_ < 1) throw std::invalid_argument("SlidingWindowLsCost: window must be >= 1");

  const long R = rows_.rows();
  const int n = dimension();
  caches_.reserve(R);

  Matrix gram = Matrix::Zero(n, n);
  Vector atb = Vector::Zero(n);
  double btb = 0.0;
  const auto add_row = [&](long j, double sign) {
    const auto a = rows_.row(j).head(n).transpose();
    const double b = rows_(j, n);
    gram.noalias() += sign * (a * a.transpose());
    atb.noalias() += sign * (a * b);
    btb += sign * b * b;
  };

  for (long j = 0; j < R; ++j) {
    add_row(j, 1.0);
    if (j >= window_) add_row(j - window_, -1.0);
    caches_.push_back(WindowCache{gram, atb, btb});
  }
}

long SlidingWindowLsCost::index_of(double t) const {
  const long idx = std::lround(t);
  return std::clamp(idx, 0L, rows_.rows() - 1);
}

const SlidingWindowLsCost::WindowCache& SlidingWindowLsCost::cache_at(double t) const {
  return caches_[static_cast<std::size_t>(index_of(t))];
}

double SlidingWindowLsCost::value(const Vector& x, double t) const {
  const WindowCache& c = cache_at(t);
  const double quad = x.dot(c.gram * x) - 2.0 * c.atb.dot(x) + c.btb;
  return quad / (2.0 * window_);
}

Vector SlidingWindowLsCost::grad_x(const Vector& x, double t) const {
  const WindowCache& c = cache_at(t);
  return (c.gram * x - c.atb) / window_;
}

std::optional<Matrix> SlidingWindowLsCost::hessian(const Vector&, double t) const {
  return Matrix(cache_at(t).gram / window_);
}

bool SlidingWindowLsCost::jump_between(double t_prev, double t_next) const {
  for (long j : jump_indices_)
    if (t_prev < static_cast<double>(j) && static_cast<double>(j) <= t_next) return true;
  return false;
}

double SlidingWindowLsCost::value_direct(const Vector& x, long index) const {
  const int n = dimension();
  const long first = std::max(0L, index - window_ + 1);
  double sum = 0.0;
  for (long j = first; j <= index; ++j) {
    const double r = rows_.row(j).head(n).dot(x) - rows_(j, n);
    sum += r * r;
  }
  return sum / (2.0 * window_);
}

StreamingLsProblem make_streaming_ls(const StreamingLsConfig& config) {
  if (config.dimension < 1 || config.window < 1 || config.steps < 1)
    throw std::invalid_argument("make_streaming_ls: dimension, window, steps must be positive");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<long> jumps = config.jump_indices;
  std::sort(jumps.begin(), jumps.end());

  const int n = config.dimension;
  std::vector<Vector> truth;
  for (std::size_t r = 0; r <= jumps.size(); ++r) {
    const double sd = (r % 2 == 0) ? 1.0 : 3.0;
    Vector x_true(n);
    for (int i = 0; i < n; ++i) x_true(i) = sd * gauss(rng);
    truth.push_back(std::move(x_true));
  }

  Matrix rows(config.steps, n + 1);
  std::size_t regime = 0;
  for (long k = 0; k < config.steps; ++k) {
    while (regime < jumps.size() && k >= jumps[regime]) ++regime;
    Vector a(n);
    for (int i = 0; i < n; ++i) a(i) = gauss(rng);
    rows.row(k).head(n) = a.transpose();
    rows(k, n) = a.dot(truth[regime]) + config.noise_sigma * gauss(rng);
  }

  return StreamingLsProblem{SlidingWindowLsCost(std::move(rows), config.window, jumps),
                            std::move(truth)};
}

SlidingWindowLsCost load_streaming_ls(const std::string& path, int window, long min_rows,
                                      std::vector<long> jump_indices) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_streaming_ls: cannot open " + path);

  std::vector<std::vector<double>> parsed;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream fields(line);
    std::vector<double> row;
    double v;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) {
      throw std::runtime_error("load_streaming_ls: malformed number at " + path + ":" +
                               std::to_string(line_no));
    }
    if (row.empty()) continue;
    if (!parsed.empty() && row.size() != parsed.front().size())
      throw std::runtime_error("load_streaming_ls: inconsistent column count at " + path + ":" +
                               std::to_string(line_no));
    parsed.push_back(std::move(row));
  }
  if (parsed.empty() || parsed.front().size() < 2)
    throw std::runtime_error("load_streaming_ls: need rows with at least one feature and a target");
  if (static_cast<long>(parsed.size()) < min_rows)
    throw std::runtime_error("load_streaming_ls: " + path + " has " +
                             std::to_string(parsed.size()) + " rows, need at least " +
                             std::to_string(min_rows));

  Matrix rows(parsed.size(), parsed.front().size());
  for (std::size_t i = 0; i < parsed.size(); ++i)
    for (std::size_t j = 0; j < parsed[i].size(); ++j) rows(i, j) = parsed[i][j];
  return SlidingWindowLsCost(std::move(rows), window, std::move(jump_indices));
}

}  // namespace tvopt
