#include "sagd/solver.hpp"

#include <chrono>
#include <cmath>

#include "sagd/constants.hpp"

namespace sagd {

const char* to_string(TableInit policy) {
  switch (policy) {
    case TableInit::at_x0: return "at-x0";
    case TableInit::zeros: return "zeros";
    case TableInit::random: return "random";
  }
  return "?";
}

TableInit parse_table_init(const std::string& name) {
  if (name == "at-x0") return TableInit::at_x0;
  if (name == "zeros") return TableInit::zeros;
  if (name == "random") return TableInit::random;
  throw InvalidInput("unknown table init '" + name + "' (expected at-x0, zeros or random)");
}

void GradientTable::write(Index j, const Eigen::VectorXd& g) {
  col_sum += g - J.col(j);
  J.col(j) = g;
  if (++updates_since_refresh >= J.cols()) refresh();
}

void GradientTable::refresh() {
  col_sum = J.rowwise().sum();
  updates_since_refresh = 0;
}

GradientTable init_table(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x0,
                         TableInit policy, SeededRng& rng, std::int64_t& grad_evals) {
  if (x0.size() != data.d()) throw InvalidInput("init_table: x0 has the wrong length");
  GradientTable t;
  switch (policy) {
    case TableInit::at_x0:
      t.J = grad_matrix(data, loss, x0);
      grad_evals += data.n();
      break;
    case TableInit::zeros:
      t.J = Eigen::MatrixXd::Zero(data.d(), data.n());
      break;
    case TableInit::random:
      t.J.resize(data.d(), data.n());
      for (Index j = 0; j < data.n(); ++j)
        for (Index r = 0; r < data.d(); ++r) t.J(r, j) = rng.normal();
      break;
  }
  t.refresh();
  return t;
}

SagdSolver::SagdSolver(const Dataset& data, const LossSpec& loss, double q, Index tau,
                       double alpha, const Eigen::VectorXd& x0, TableInit table_init,
                       std::uint64_t seed)
    : data_(&data),
      loss_(loss),
      q_(q),
      tau_(tau),
      alpha_(alpha),
      theta_(sagd::theta(InterpolationConfig{q, tau, data.n()})),
      x_(x0),
      rng_(seed),
      sampler_(data.n()) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw InvalidInput("stepsize must be finite and nonnegative");
  table_ = init_table(data, loss, x0, table_init, rng_, grad_evals_);
  fresh_.resize(data.d(), tau);
}

Eigen::VectorXd SagdSolver::direction(std::span<const Index> indices) const {
  const double n = static_cast<double>(data_->n());
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(data_->d());
  Eigen::VectorXd g;
  for (Index j : indices) {
    grad_i(*data_, loss_, x_, j, g);
    delta += g - table_.J.col(j);
  }
  return (theta_ / n) * delta + table_.col_sum / n;
}

void SagdSolver::apply(std::span<const Index> indices) {
  const double n = static_cast<double>(data_->n());
  const auto count = static_cast<Index>(indices.size());
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(data_->d());
  for (Index k = 0; k < count; ++k) {
    const Index j = indices[static_cast<std::size_t>(k)];
    grad_i(*data_, loss_, x_, j, scratch_);
    fresh_.col(k) = scratch_;
    delta += scratch_ - table_.J.col(j);
  }
  x_ -= alpha_ * ((theta_ / n) * delta + table_.col_sum / n);
  for (Index k = 0; k < count; ++k) {
    scratch_ = fresh_.col(k);
    table_.write(indices[static_cast<std::size_t>(k)], scratch_);
  }
  grad_evals_ += count;
  ++iterations_;
}

void SagdSolver::step() {
  bool minibatch = q_ >= 1.0;
  if (q_ > 0.0 && q_ < 1.0) minibatch = rng_.uniform() < q_;
  if (minibatch) {
    apply(sampler_.draw(rng_, tau_));
  } else {
    const Index j = static_cast<Index>(rng_.uniform_index(static_cast<std::size_t>(data_->n())));
    apply(std::span<const Index>(&j, 1));
  }
}

double lyapunov(const Eigen::VectorXd& x, const GradientTable& table,
                const Eigen::VectorXd& x_star, const Eigen::MatrixXd& grads_at_star,
                double theta, double alpha, double L_max) {
  const double n = static_cast<double>(table.J.cols());
  const double weight = theta * alpha / (2.0 * n * L_max);
  return (x - x_star).squaredNorm() + weight * (table.J - grads_at_star).squaredNorm();
}

double RunResult::effective_passes(Index n) const {
  if (trajectory.empty()) return 0.0;
  return static_cast<double>(trajectory.back().grad_evals) / static_cast<double>(n);
}

RunResult run(const Dataset& data, const LossSpec& loss, const SolverConfig& cfg,
              const std::optional<Eigen::VectorXd>& x_star) {
  validate(data, loss);
  const Index n = data.n();
  const InterpolationConfig icfg{cfg.q, cfg.tau, n};
  icfg.validate();
  if (!(cfg.tol > 0.0)) throw InvalidInput("tol must be positive");
  if (!(cfg.check_every_passes > 0.0)) throw InvalidInput("check interval must be positive");
  if (x_star && x_star->size() != data.d()) throw InvalidInput("x* has the wrong length");

  std::optional<SmoothnessProfile> profile;
  if (!cfg.alpha || cfg.track_lyapunov) profile = smoothness_profile(data, loss);

  RunResult result;
  result.alpha = cfg.alpha ? *cfg.alpha : stepsize_alpha(icfg, profile->summary());
  if (!(result.alpha > 0.0)) throw InvalidInput("stepsize must be positive");

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(data.d());
  SagdSolver solver(data, loss, cfg.q, cfg.tau, result.alpha, x0, cfg.table_init, cfg.seed);
  result.theta = solver.theta();

  Eigen::MatrixXd grads_at_star;
  const bool lyap = cfg.track_lyapunov && x_star.has_value();
  if (lyap) grads_at_star = grad_matrix(data, loss, *x_star);

  const auto start = std::chrono::steady_clock::now();
  auto record = [&]() {
    TrajectoryPoint p;
    p.iter = solver.iterations();
    p.grad_evals = solver.grad_evals();
    p.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (x_star) {
      p.error = (solver.x() - *x_star).norm();
    } else {
      p.error = full_grad(data, loss, solver.x()).norm();
      result.check_evals += n;
    }
    if (lyap)
      p.lyapunov = lyapunov(solver.x(), solver.table(), *x_star, grads_at_star, solver.theta(),
                            solver.alpha(), profile->L_max);
    result.trajectory.push_back(p);
    return p.error <= cfg.tol;
  };

  const double interval = cfg.check_every_passes * static_cast<double>(n);
  const double budget = cfg.max_effective_passes * static_cast<double>(n);
  double next_check = static_cast<double>(solver.grad_evals()) + interval;
  bool done = record();
  while (!done) {
    solver.step();
    const auto evals = static_cast<double>(solver.grad_evals());
    if (evals >= next_check || evals >= budget) {
      while (next_check <= evals) next_check += interval;
      done = record();
      if (!done && evals >= budget) break;
    }
  }
  result.converged = done;
  result.x = solver.x();
  return result;
}

}  // namespace sagd
