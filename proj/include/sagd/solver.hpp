#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sagd/numerics.hpp"
#include "sagd/problem.hpp"
#include "sagd/rng.hpp"

namespace sagd {

enum class TableInit { at_x0, zeros, random };
const char* to_string(TableInit policy);
TableInit parse_table_init(const std::string& name);

/// The d×n table of stored per-sample gradients and its running column sum.
///
/// `col_sum` is updated incrementally on every write and recomputed from the
/// table after every n writes, which bounds accumulated rounding drift.
struct GradientTable {
  Eigen::MatrixXd J;
  Eigen::VectorXd col_sum;
  Index updates_since_refresh = 0;

  /// Overwrites column j with g.
  void write(Index j, const Eigen::VectorXd& g);
  void refresh();
};

/// Builds the starting table. `at_x0` costs n gradient evaluations, which
/// are added to `grad_evals`; `random` draws standard normals from `rng`.
GradientTable init_table(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x0,
                         TableInit policy, SeededRng& rng, std::int64_t& grad_evals);

struct SolverConfig {
  double q = 0.0;
  Index tau = 1;
  std::optional<double> alpha;  // empty: stepsize from the smoothness profile
  TableInit table_init = TableInit::at_x0;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  double max_effective_passes = 500.0;
  double check_every_passes = 1.0;
  bool track_lyapunov = false;
};

struct TrajectoryPoint {
  std::int64_t iter = 0;
  std::int64_t grad_evals = 0;
  double wall_seconds = 0.0;
  double error = 0.0;  // ‖x − x*‖ when x* is known, else ‖∇f(x)‖
  std::optional<double> lyapunov;
};

/// The SAGD iteration: with probability q a τ-minibatch SAGA step, otherwise
/// a single-sample SAGA step, both using the bias correction θ = n/(q(τ−1)+1).
class SagdSolver {
 public:
  SagdSolver(const Dataset& data, const LossSpec& loss, double q, Index tau, double alpha,
             const Eigen::VectorXd& x0, TableInit table_init, std::uint64_t seed);

  /// One iteration. A uniform draw decides the branch only when 0 < q < 1.
  void step();

  /// The update direction the iteration would take at the current point if
  /// `indices` (sorted) were sampled:
  ///   (θ/n)·Σ_{j∈indices}(f′_j(x) − J_{:j}) + (1/n)·J e.
  Eigen::VectorXd direction(std::span<const Index> indices) const;

  const Eigen::VectorXd& x() const { return x_; }
  const GradientTable& table() const { return table_; }
  double theta() const { return theta_; }
  double alpha() const { return alpha_; }
  double q() const { return q_; }
  Index tau() const { return tau_; }
  std::int64_t iterations() const { return iterations_; }
  std::int64_t grad_evals() const { return grad_evals_; }

 private:
  void apply(std::span<const Index> indices);

  const Dataset* data_;
  LossSpec loss_;
  double q_;
  Index tau_;
  double alpha_;
  double theta_;
  Eigen::VectorXd x_;
  GradientTable table_;
  SeededRng rng_;
  SubsetSampler sampler_;
  std::int64_t iterations_ = 0;
  std::int64_t grad_evals_ = 0;
  Eigen::MatrixXd fresh_;  // gradients of the current sample, one column each
  Eigen::VectorXd scratch_;
};

/// Ψ = ‖x − x*‖² + (θα/(2nL_max))·‖J − ∇F(x*)‖²_F.
double lyapunov(const Eigen::VectorXd& x, const GradientTable& table,
                const Eigen::VectorXd& x_star, const Eigen::MatrixXd& grads_at_star,
                double theta, double alpha, double L_max);

struct RunResult {
  std::vector<TrajectoryPoint> trajectory;
  bool converged = false;
  double alpha = 0.0;
  double theta = 0.0;
  Eigen::VectorXd x;
  /// Full-gradient evaluations spent on convergence checks (not in grad_evals).
  std::int64_t check_evals = 0;

  /// grad_evals / n at the last recorded point.
  double effective_passes(Index n) const;
};

/// Iterates until the error reaches `cfg.tol`, or the pass budget runs out.
/// With `x_star` the error is ‖x − x*‖; without, it is ‖∇f(x)‖, evaluated
/// only at checkpoints and booked in `check_evals`. A point is recorded at
/// the start and every `check_every_passes`·n gradient evaluations.
RunResult run(const Dataset& data, const LossSpec& loss, const SolverConfig& cfg,
              const std::optional<Eigen::VectorXd>& x_star = std::nullopt);

}  // namespace sagd
