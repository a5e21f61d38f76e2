#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sagd/error.hpp"
#include "sagd/rng.hpp"

namespace sagd {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> eigenvalues;   // ascending
  Matrix<Scalar> eigenvectors;  // column k pairs with eigenvalues(k)
};

namespace detail {

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& m, const char* who) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols() || m.rows() == 0)
    throw InvalidInput(std::string(who) + ": matrix must be square and non-empty");
  if (!m.allFinite())
    throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
    throw InvalidInput(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps the strict upper triangle row by row, annihilating each (p, q)
/// entry with one plane rotation, until the off-diagonal Frobenius mass is
/// below machine epsilon relative to ‖M‖_F. Eigenvalues are returned in
/// ascending order with matching eigenvector columns.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eigen(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_symmetric(m, "symmetric_eigen");

  const Index n = m.rows();
  Matrix<Scalar> a = (m + m.transpose()) / Scalar(2);
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar total = a.norm();
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Scalar off = 0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(Scalar(2) * off) <= eps * total) break;

    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar app = a(p, p);
        const Scalar aqq = a(q, q);
        // Negligible relative to both diagonal entries: drop it.
        if (sweep > 3 && std::abs(apq) * Scalar(100) * (Scalar(1) / eps) <=
                             std::min(std::abs(app), std::abs(aqq))) {
          a(p, q) = a(q, p) = 0;
          continue;
        }
        const Scalar theta = (aqq - app) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        if (theta < 0) t = -t;
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0;
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) < a(j, j); });

  SymmetricEigen<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

/// Solves M x = b for symmetric positive definite M (Cholesky plus one step
/// of iterative refinement).
template <typename DerivedM, typename DerivedB>
Vector<typename DerivedM::Scalar> solve_spd(const Eigen::MatrixBase<DerivedM>& m,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedM::Scalar;
  detail::require_symmetric(m, "solve_spd");
  if (b.size() != m.rows()) throw InvalidInput("solve_spd: dimension mismatch");

  const Matrix<Scalar> mm = m;
  Eigen::LLT<Matrix<Scalar>> llt(mm);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("solve_spd: non-positive pivot in Cholesky factorization");
  Vector<Scalar> x = llt.solve(b);
  const Vector<Scalar> r = b - mm * x;
  x += llt.solve(r);
  return x;
}

/// Draws uniform τ-subsets of {0, …, n−1} by partial Fisher–Yates over a
/// persistent permutation (O(τ) swaps per draw). The returned view is
/// sorted ascending and valid until the next draw.
class SubsetSampler {
 public:
  explicit SubsetSampler(Index n) : perm_(static_cast<std::size_t>(n)) {
    if (n < 1) throw InvalidInput("SubsetSampler: n must be positive");
    std::iota(perm_.begin(), perm_.end(), Index(0));
  }

  std::span<const Index> draw(SeededRng& rng, Index tau) {
    const auto n = static_cast<Index>(perm_.size());
    if (tau < 1 || tau > n)
      throw InvalidInput("sample_subset: tau must lie in [1, n]");
    for (Index i = 0; i < tau; ++i) {
      const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n - i)));
      std::swap(perm_[static_cast<std::size_t>(i)], perm_[static_cast<std::size_t>(j)]);
    }
    picked_.assign(perm_.begin(), perm_.begin() + tau);
    std::sort(picked_.begin(), picked_.end());
    return picked_;
  }

  Index n() const { return static_cast<Index>(perm_.size()); }

 private:
  std::vector<Index> perm_;
  std::vector<Index> picked_;
};

/// Uniform random τ-subset of {0, …, n−1}, sorted ascending.
inline std::vector<Index> sample_subset(SeededRng& rng, Index n, Index tau) {
  if (n < 1 || tau < 1 || tau > n)
    throw InvalidInput("sample_subset: need 1 <= tau <= n");
  SubsetSampler sampler(n);
  const auto view = sampler.draw(rng, tau);
  return {view.begin(), view.end()};
}

}  // namespace sagd
