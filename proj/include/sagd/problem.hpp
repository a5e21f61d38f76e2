#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <optional>

#include "sagd/numerics.hpp"
#include "sagd/profile.hpp"

namespace sagd {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// n samples a_i ∈ R^d stored as the rows of a sparse matrix, plus labels.
struct Dataset {
  SparseRows rows;
  Eigen::VectorXd labels;
  bool normalized = false;

  Index n() const { return rows.rows(); }
  Index d() const { return rows.cols(); }

  /// Throws InvalidInput on empty data, label/row count mismatch, non-finite
  /// values, or a `normalized` flag that does not hold.
  void validate() const;
};

enum class LossKind { ridge, logistic };

struct LossSpec {
  LossKind kind = LossKind::ridge;
  double lambda = 0.0;
};

const char* to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

/// Checks λ ≥ 0 and, for logistic loss, labels in {−1, +1}.
void validate(const Dataset& data, const LossSpec& loss);

/// ∇f_i(x), written into `out` (resized as needed).
void grad_i(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x,
            Index i, Eigen::VectorXd& out);
Eigen::VectorXd grad_i(const Dataset& data, const LossSpec& loss,
                       const Eigen::VectorXd& x, Index i);

/// f_i(x).
double loss_i(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x,
              Index i);

Eigen::VectorXd full_grad(const Dataset& data, const LossSpec& loss,
                          const Eigen::VectorXd& x);

double objective(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x);

/// Per-sample gradients at x as the columns of a d×n matrix (∇F(x)).
Eigen::MatrixXd grad_matrix(const Dataset& data, const LossSpec& loss,
                            const Eigen::VectorXd& x);

inline constexpr Index kDefaultExactMuDimLimit = 512;

/// Smoothness constants L_i and strong convexity μ.
///
/// Ridge: L_i = ‖a_i‖² + λ, and μ = λ_min(AᵀA)/n + λ when d ≤
/// `exact_mu_dim_limit` (else the lower bound μ = λ).
/// Logistic (with the ½ factor on the data term): L_i = ‖a_i‖²/8 + λ, μ = λ.
/// Throws NotStronglyConvex when μ is not positive.
SmoothnessProfile smoothness_profile(const Dataset& data, const LossSpec& loss,
                                     Index exact_mu_dim_limit = kDefaultExactMuDimLimit);

/// High-accuracy minimizer. Ridge solves the normal equations; logistic runs
/// full-gradient descent with step 1/L̄ until ‖∇f‖ ≤ tol. Throws
/// ConvergenceFailure (carrying the achieved norm) when `max_iterations` is hit.
Eigen::VectorXd exact_solution(const Dataset& data, const LossSpec& loss,
                               double tol = 1e-12, Index max_iterations = 1'000'000);

/// Scales every row to unit Euclidean norm. Throws InvalidInput naming the
/// first zero row.
Dataset normalize_rows(const Dataset& data);

}  // namespace sagd
