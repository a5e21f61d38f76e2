#include "sagd/problem.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sagd {

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// 1 / (1 + e^t).
double sigmoid_neg(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double row_dot(const SparseRows& rows, Index i, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (SparseRows::InnerIterator it(rows, i); it; ++it) s += it.value() * x(it.index());
  return s;
}

void check_index(const Dataset& data, Index i) {
  if (i < 0 || i >= data.n())
    throw InvalidInput("sample index " + std::to_string(i) + " out of range [0, " +
                       std::to_string(data.n()) + ")");
}

void check_point(const Dataset& data, const Eigen::VectorXd& x) {
  if (x.size() != data.d())
    throw InvalidInput("point has length " + std::to_string(x.size()) +
                       ", expected " + std::to_string(data.d()));
}

// Scalar factor s_i with ∇f_i(x) = s_i·a_i + λx.
double data_term_slope(const Dataset& data, const LossSpec& loss,
                       const Eigen::VectorXd& x, Index i) {
  const double ax = row_dot(data.rows, i, x);
  const double y = data.labels(i);
  if (loss.kind == LossKind::ridge) return ax - y;
  return -0.5 * y * sigmoid_neg(y * ax);
}

}  // namespace

const char* to_string(LossKind kind) {
  return kind == LossKind::ridge ? "ridge" : "logistic";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "ridge") return LossKind::ridge;
  if (name == "logistic") return LossKind::logistic;
  throw InvalidInput("unknown loss '" + name + "' (expected ridge or logistic)");
}

void Dataset::validate() const {
  if (n() < 1 || d() < 1) throw InvalidInput("dataset must have n >= 1 and d >= 1");
  if (labels.size() != n())
    throw InvalidInput("dataset has " + std::to_string(labels.size()) + " labels for " +
                       std::to_string(n()) + " rows");
  if (!labels.allFinite()) throw InvalidInput("dataset labels must be finite");
  for (Index i = 0; i < n(); ++i) {
    double sq = 0.0;
    for (SparseRows::InnerIterator it(rows, i); it; ++it) {
      if (!std::isfinite(it.value()))
        throw InvalidInput("row " + std::to_string(i) + " has a non-finite value");
      sq += it.value() * it.value();
    }
    if (normalized && std::abs(std::sqrt(sq) - 1.0) > 1e-12)
      throw InvalidInput("row " + std::to_string(i) + " is flagged normalized but has norm " +
                         std::to_string(std::sqrt(sq)));
  }
}

void validate(const Dataset& data, const LossSpec& loss) {
  data.validate();
  if (!(loss.lambda >= 0.0) || !std::isfinite(loss.lambda))
    throw InvalidInput("lambda must be a finite nonnegative number");
  if (loss.kind == LossKind::logistic) {
    for (Index i = 0; i < data.n(); ++i) {
      const double y = data.labels(i);
      if (y != 1.0 && y != -1.0)
        throw InvalidInput("logistic loss needs labels in {-1, +1}; row " +
                           std::to_string(i) + " has " + std::to_string(y));
    }
  }
}

void grad_i(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x,
            Index i, Eigen::VectorXd& out) {
  check_index(data, i);
  check_point(data, x);
  const double slope = data_term_slope(data, loss, x, i);
  out = loss.lambda * x;
  for (SparseRows::InnerIterator it(data.rows, i); it; ++it)
    out(it.index()) += slope * it.value();
}

Eigen::VectorXd grad_i(const Dataset& data, const LossSpec& loss,
                       const Eigen::VectorXd& x, Index i) {
  Eigen::VectorXd out;
  grad_i(data, loss, x, i, out);
  return out;
}

double loss_i(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x,
              Index i) {
  check_index(data, i);
  check_point(data, x);
  const double ax = row_dot(data.rows, i, x);
  const double y = data.labels(i);
  const double reg = 0.5 * loss.lambda * x.squaredNorm();
  if (loss.kind == LossKind::ridge) return 0.5 * (ax - y) * (ax - y) + reg;
  return 0.5 * softplus(-y * ax) + reg;
}

Eigen::VectorXd full_grad(const Dataset& data, const LossSpec& loss,
                          const Eigen::VectorXd& x) {
  check_point(data, x);
  const Index n = data.n();
  Eigen::VectorXd slopes(n);
  for (Index i = 0; i < n; ++i) slopes(i) = data_term_slope(data, loss, x, i);
  Eigen::VectorXd g = loss.lambda * x;
  // Row-major traversal keeps the reduction order fixed (sample by sample).
  for (Index i = 0; i < n; ++i)
    for (SparseRows::InnerIterator it(data.rows, i); it; ++it)
      g(it.index()) += slopes(i) * it.value() / static_cast<double>(n);
  return g;
}

double objective(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& x) {
  check_point(data, x);
  double sum = 0.0;
  for (Index i = 0; i < data.n(); ++i) {
    const double ax = row_dot(data.rows, i, x);
    const double y = data.labels(i);
    sum += loss.kind == LossKind::ridge ? 0.5 * (ax - y) * (ax - y)
                                        : 0.5 * softplus(-y * ax);
  }
  return sum / static_cast<double>(data.n()) + 0.5 * loss.lambda * x.squaredNorm();
}

Eigen::MatrixXd grad_matrix(const Dataset& data, const LossSpec& loss,
                            const Eigen::VectorXd& x) {
  Eigen::MatrixXd out(data.d(), data.n());
  Eigen::VectorXd g;
  for (Index i = 0; i < data.n(); ++i) {
    grad_i(data, loss, x, i, g);
    out.col(i) = g;
  }
  return out;
}

SmoothnessProfile smoothness_profile(const Dataset& data, const LossSpec& loss,
                                     Index exact_mu_dim_limit) {
  validate(data, loss);
  const Index n = data.n();

  SmoothnessProfile p;
  p.L.resize(n);
  const double curvature = loss.kind == LossKind::ridge ? 1.0 : 0.125;
  for (Index i = 0; i < n; ++i) p.L(i) = curvature * data.rows.row(i).squaredNorm() + loss.lambda;
  p.L_max = p.L.maxCoeff();
  p.L_bar = p.L.mean();

  if (loss.kind == LossKind::ridge && data.d() <= exact_mu_dim_limit) {
    const Eigen::MatrixXd gram =
        Eigen::MatrixXd(data.rows.transpose() * data.rows) / static_cast<double>(n);
    const double lambda_min = symmetric_eigen(gram).eigenvalues(0);
    // Rounding can leave a singular Gram matrix a hair above or below zero.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, gram.norm());
    p.mu = (lambda_min > floor ? lambda_min : 0.0) + loss.lambda;
    p.mu_source = MuSource::exact_eigen;
  } else {
    p.mu = loss.lambda;
    p.mu_source = MuSource::lambda_lower_bound;
  }

  if (!(p.mu > 0.0))
    throw NotStronglyConvex(
        "strong convexity constant is zero: use lambda > 0 or a full-rank design");
  return p;
}

Eigen::VectorXd exact_solution(const Dataset& data, const LossSpec& loss, double tol,
                               Index max_iterations) {
  validate(data, loss);
  const Index n = data.n();
  const Index d = data.d();
  const auto nd = static_cast<double>(n);

  if (loss.kind == LossKind::ridge) {
    Eigen::MatrixXd hessian = Eigen::MatrixXd(data.rows.transpose() * data.rows) / nd;
    hessian.diagonal().array() += loss.lambda;
    const Eigen::VectorXd rhs = (data.rows.transpose() * data.labels) / nd;
    Eigen::VectorXd x;
    try {
      x = solve_spd(hessian, rhs);
    } catch (const NotPositiveDefinite&) {
      throw NotStronglyConvex("ridge Hessian is singular: use lambda > 0");
    }
    double norm = full_grad(data, loss, x).norm();
    for (int refine = 0; refine < 3 && norm > tol; ++refine) {
      x -= solve_spd(hessian, full_grad(data, loss, x));
      norm = full_grad(data, loss, x).norm();
    }
    if (norm > tol)
      throw ConvergenceFailure("ridge normal equations did not reach the gradient tolerance",
                               norm);
    return x;
  }

  const SmoothnessProfile profile = smoothness_profile(data, loss, 0);
  const double step = 1.0 / profile.L_bar;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  double norm = 0.0;
  for (Index it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd g = full_grad(data, loss, x);
    norm = g.norm();
    if (norm <= tol) return x;
    x -= step * g;
  }
  norm = full_grad(data, loss, x).norm();
  if (norm <= tol) return x;
  throw ConvergenceFailure("logistic reference solve hit its iteration cap", norm);
}

Dataset normalize_rows(const Dataset& data) {
  Dataset out = data;
  for (Index i = 0; i < out.n(); ++i) {
    const double norm = out.rows.row(i).norm();
    if (norm == 0.0)
      throw InvalidInput("row " + std::to_string(i) + " is zero and cannot be normalized");
    // Rows already unit up to rounding are left untouched (idempotence).
    if (std::abs(norm - 1.0) > 4.0 * std::numeric_limits<double>::epsilon())
      for (SparseRows::InnerIterator it(out.rows, i); it; ++it) it.valueRef() /= norm;
  }
  out.normalized = true;
  return out;
}

}  // namespace sagd
