#include "sagd/sketch_oracle.hpp"

#include <cmath>
#include <string>

#include "sagd/error.hpp"
#include "sagd/numerics.hpp"

namespace sagd {

namespace {

void check_enumerable(Index n, Index tau, double q) {
  if (n < 1) throw InvalidInput("enumeration needs n >= 1");
  if (n > kMaxEnumerableN)
    throw EnumerationLimit("enumeration is limited to n <= " +
                           std::to_string(kMaxEnumerableN) + "; got n=" + std::to_string(n));
  if (tau < 1 || tau > n) throw InvalidInput("enumeration needs 1 <= tau <= n");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("enumeration needs q in [0, 1]");
}

// Visits every k-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_subset(Index n, Index k, Visit&& visit) {
  std::vector<Index> c(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(c);
    Index i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (Index i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

std::vector<SamplingAtom> enumerate_sampling(Index n, Index tau, double q) {
  check_enumerable(n, tau, q);
  std::vector<SamplingAtom> atoms;
  const double single = (1.0 - q) / static_cast<double>(n);
  for (Index j = 0; j < n; ++j) atoms.push_back({single, {j}});
  const double subset = q / binomial(n, tau);
  for_each_subset(n, tau, [&](const std::vector<Index>& c) { atoms.push_back({subset, c}); });
  return atoms;
}

Eigen::MatrixXd oracle_E_PiS(Index n, Index tau, double q) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  for (const auto& atom : enumerate_sampling(n, tau, q))
    for (Index i : atom.indices) e(i, i) += atom.probability;
  return e;
}

double oracle_theta(Index n, Index tau, double q) {
  // E[Π_S] is a multiple of the identity, so θ·E[Π_S]e = e fixes θ from any
  // diagonal entry; average them to use all of the enumeration.
  return 1.0 / oracle_E_PiS(n, tau, q).diagonal().mean();
}

Eigen::MatrixXd oracle_residual_matrix(Index n, Index tau, double q) {
  const double th = oracle_theta(n, tau, q);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& atom : enumerate_sampling(n, tau, q))
    for (Index i : atom.indices)
      for (Index j : atom.indices) m(i, j) += atom.probability;
  return th * th * m - Eigen::MatrixXd::Ones(n, n);
}

double oracle_rho(Index n, Index tau, double q) {
  const auto eig = symmetric_eigen(oracle_residual_matrix(n, tau, q));
  return eig.eigenvalues(eig.eigenvalues.size() - 1);
}

double oracle_L1_max_term(const Eigen::VectorXd& L, Index tau) {
  const Index n = L.size();
  check_enumerable(n, tau, 0.0);
  Eigen::VectorXd per_index = Eigen::VectorXd::Zero(n);
  for_each_subset(n, tau, [&](const std::vector<Index>& c) {
    double lc = 0.0;
    for (Index j : c) lc += L(j);
    lc /= static_cast<double>(tau);
    for (Index i : c) per_index(i) += lc;
  });
  return per_index.maxCoeff();
}

double oracle_L1(const Eigen::VectorXd& L, Index tau, double q) {
  const Index n = L.size();
  const double nd = static_cast<double>(n);
  const double th = oracle_theta(n, tau, q);
  const double max_term = oracle_L1_max_term(L, tau);
  return th * th / nd * (q * static_cast<double>(tau) / binomial(n, tau)) * max_term +
         th * th * (1.0 - q) / (nd * nd) * L.maxCoeff();
}

}  // namespace sagd
