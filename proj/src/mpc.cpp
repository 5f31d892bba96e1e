#include "tvopt/mpc.hpp"

#include "tvopt/solvers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace tvopt {

double UnicycleState::head_x() const { return x + b * std::cos(theta); }
double UnicycleState::head_y() const { return y + b * std::sin(theta); }

UnicycleState unicycle_advance(const UnicycleState& state, double u1, double u2, double delta) {
  const double dx = delta * u1;
  const double dy = delta * u2;
  UnicycleState next = state;
  if (dx != 0.0 || dy != 0.0) next.theta = std::atan2(dy, dx);
  next.x = state.head_x() + dx - next.b * std::cos(next.theta);
  next.y = state.head_y() + dy - next.b * std::sin(next.theta);
  return next;
}

ReferenceFn sine_reference(double delta, double amplitude, double frequency) {
  return [=](long k) {
    const double rx = delta * static_cast<double>(k);
    return std::make_pair(rx, amplitude * std::sin(frequency * rx));
  };
}

HorizonQpCost::HorizonQpCost(double head, Vector reference, double lambda, double delta,
                             int control_horizon)
    : lambda_(lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("HorizonQpCost: lambda must be positive");
  if (reference.size() < 1 || control_horizon < 1)
    throw std::invalid_argument("HorizonQpCost: horizons must be >= 1");

  const int Hp = static_cast<int>(reference.size());
  const int Hu = control_horizon;
  sensitivity_ = Matrix::Zero(Hp, Hu);
  for (int i = 0; i < Hp; ++i)
    for (int j = 0; j < std::min(i, Hu); ++j) sensitivity_(i, j) = delta;
  residual_offset_ = reference.array() - head;
  hess_ = 2.0 * (sensitivity_.transpose() * sensitivity_ +
                 Matrix::Identity(Hu, Hu) / lambda);
}

double HorizonQpCost::value(const Vector& u, double) const {
  const Vector e = residual_offset_ - sensitivity_ * u;
  return e.squaredNorm() + u.squaredNorm() / lambda_;
}

Vector HorizonQpCost::grad_x(const Vector& u, double) const {
  const Vector e = residual_offset_ - sensitivity_ * u;
  return -2.0 * (sensitivity_.transpose() * e) + (2.0 / lambda_) * u;
}

Vector HorizonQpCost::solve_exact() const {
  return (0.5 * hess_).llt().solve(sensitivity_.transpose() * residual_offset_);
}

HorizonQpCost mpc_horizon_cost(const UnicycleState& state, MpcAxis axis,
                               const ReferenceFn& reference, long k, int Hp, int Hu,
                               double lambda, double delta) {
  if (Hp < 1 || Hu < 1) throw std::invalid_argument("mpc_horizon_cost: horizons must be >= 1");
  Vector r(Hp);
  for (int i = 0; i < Hp; ++i) {
    const auto [rx, ry] = reference(k + i);
    r(i) = axis == MpcAxis::X ? rx : ry;
  }
  const double head = axis == MpcAxis::X ? state.head_x() : state.head_y();
  return HorizonQpCost(head, std::move(r), lambda, delta, Hu);
}

void MpcConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("MpcConfig: lambda must be positive");
  if (Hp < 1 || Hu < 1) throw std::invalid_argument("MpcConfig: horizons must be >= 1");
  if (!(delta > 0.0) || !(alpha > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("MpcConfig: delta, alpha, epsilon must be positive");
  if (steps < 0) throw std::invalid_argument("MpcConfig: steps must be nonnegative");
  if (algorithm == Algorithm::Alg1)
    throw std::invalid_argument(
        "MpcConfig: horizon costs have no analytic time derivative; alg1 cannot run here (use "
        "alg2)");
}

namespace {

struct AxisLoop {
  Vector u;
  SolverState state;
  std::optional<HorizonQpCost> curr;
  std::optional<HorizonQpCost> prev;
};

}  // namespace

MpcSummary run_mpc(const MpcConfig& config, const MpcRecordSink& sink) {
  config.validate();

  const ReferenceFn ref =
      sine_reference(config.delta, config.ref_amplitude, config.ref_frequency);
  UnicycleState robot{config.x0, config.y0, config.theta0, config.b};

  AxisLoop axes[2];
  for (int a = 0; a < 2; ++a) {
    axes[a].u = Vector::Constant(config.Hu, config.u_init);
    axes[a].state.x = axes[a].u;
    axes[a].curr = mpc_horizon_cost(robot, a == 0 ? MpcAxis::X : MpcAxis::Y, ref, 0, config.Hp,
                                    config.Hu, config.lambda, config.delta);
  }

  MpcSummary summary;
  {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(axes[0].curr->hessian_matrix());
    summary.qp_constants.m = eig.eigenvalues().minCoeff();
    summary.qp_constants.M = eig.eigenvalues().maxCoeff();
    summary.qp_constants.empirical = false;
  }

  long grad_evals = 0;
  const auto update_axis = [&](AxisLoop& ax, const HorizonQpCost& next, long k) -> bool {
    const double t_next = sample_time(0.0, k + 1, config.delta);
    bool active = false;
    switch (config.algorithm) {
      case Algorithm::GradientDescent:
        ax.u = gd_step(next, ax.u, t_next, config.alpha).x_new;
        grad_evals += 1;
        break;
      case Algorithm::Alg2: {
        if (!ax.prev) {  // no earlier cost to difference against
          ax.u = gd_step(next, ax.u, t_next, config.alpha).x_new;
          grad_evals += 1;
          break;
        }
        const double t_k = sample_time(0.0, k, config.delta);
        const double t_prev = sample_time(0.0, k - 1, config.delta);
        const double f_now = ax.curr->value(ax.u, t_k);
        const double f_prev = ax.prev->value(ax.u, t_prev);
        const Prediction p =
            alg2_predict(*ax.curr, ax.u, t_k, t_prev, f_now, f_prev, config.epsilon);
        ax.u = correct(next, p.x_pred, t_next, config.alpha);
        grad_evals += 2;
        active = p.active;
        break;
      }
      case Algorithm::NesterovV1:
        ax.state.x = ax.u;
        ax.state.k = k;
        ax.u = nesterov_v1_step(next, ax.state, t_next, config.alpha).x_new;
        grad_evals += 1;
        break;
      case Algorithm::NesterovV2:
        ax.state.x = ax.u;
        ax.state.k = k;
        ax.u = nesterov_v2_step(next, ax.state, t_next, config.alpha, summary.qp_constants).x_new;
        grad_evals += 1;
        break;
      case Algorithm::NonlinearCG:
        ax.state.x = ax.u;
        ax.u = nlcg_step(next, ax.state, t_next).x_new;
        grad_evals += 1;
        break;
      case Algorithm::Alg1:
        throw std::invalid_argument("run_mpc: alg1 is not available for horizon costs");
    }
    return active;
  };

  for (long k = 0; k < config.steps; ++k) {
    const double t_k = sample_time(0.0, k, config.delta);

    const Vector u1_star = axes[0].curr->solve_exact();
    const Vector u2_star = axes[1].curr->solve_exact();

    MpcStepRecord rec;
    rec.k = k;
    rec.t = t_k;
    rec.u1_applied = axes[0].u(0);
    rec.u2_applied = axes[1].u(0);
    rec.u1_star = u1_star(0);
    rec.u2_star = u2_star(0);
    rec.control_err = std::hypot(rec.u1_applied - rec.u1_star, rec.u2_applied - rec.u2_star);
    rec.f_val = axes[0].curr->value(axes[0].u, t_k) + axes[1].curr->value(axes[1].u, t_k);
    rec.f_star = axes[0].curr->value(u1_star, t_k) + axes[1].curr->value(u2_star, t_k);
    rec.gap = rec.f_val - rec.f_star;
    rec.grad_norm = std::hypot(axes[0].curr->grad_x(axes[0].u, t_k).norm(),
                               axes[1].curr->grad_x(axes[1].u, t_k).norm());
    rec.head_x = robot.head_x();
    rec.head_y = robot.head_y();

    robot = unicycle_advance(robot, rec.u1_applied, rec.u2_applied, config.delta);

    bool active = false;
    for (int a = 0; a < 2; ++a) {
      HorizonQpCost next =
          mpc_horizon_cost(robot, a == 0 ? MpcAxis::X : MpcAxis::Y, ref, k + 1, config.Hp,
                           config.Hu, config.lambda, config.delta);
      active = update_axis(axes[a], next, k) || active;
      axes[a].prev = std::move(axes[a].curr);
      axes[a].curr = std::move(next);
    }

    rec.pred_active = active;
    rec.grad_evals = grad_evals;
    if (sink) sink(rec);

    summary.steps_completed = k + 1;
    summary.final_control_err = rec.control_err;
    summary.final_gap = rec.gap;
    if (!std::isfinite(rec.f_val) || rec.f_val > 1e12) {
      summary.diverged = true;
      summary.diverged_at = k;
      break;
    }
  }

  summary.grad_evals = grad_evals;
  return summary;
}

}  // namespace tvopt
