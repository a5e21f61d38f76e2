#pragma once

#include <Eigen/Core>
#include <vector>

namespace sagd {

/// One outcome of the sampling: either a single index j (probability
/// (1−q)/n) or a τ-subset C (probability q / binom(n, τ)).
struct SamplingAtom {
  double probability = 0.0;
  std::vector<Eigen::Index> indices;  // sorted
};

inline constexpr Eigen::Index kMaxEnumerableN = 12;

/// n singleton atoms followed by the binom(n, τ) subset atoms in
/// lexicographic order. Throws EnumerationLimit for n > 12.
std::vector<SamplingAtom> enumerate_sampling(Eigen::Index n, Eigen::Index tau, double q);

/// E[Π_S] = Σ p·Π_atom, assembled entry by entry.
Eigen::MatrixXd oracle_E_PiS(Eigen::Index n, Eigen::Index tau, double q);

/// The constant θ with θ·E[Π_S]e = e.
double oracle_theta(Eigen::Index n, Eigen::Index tau, double q);

/// Θ = θ²·Σ p·(Π e)(Π e)ᵀ − eeᵀ as a dense n×n matrix.
Eigen::MatrixXd oracle_residual_matrix(Eigen::Index n, Eigen::Index tau, double q);

/// ρ = λ_max(Θ) from a dense eigensolve of the enumerated Θ.
double oracle_rho(Eigen::Index n, Eigen::Index tau, double q);

/// max_i Σ_{C ∋ i} L_C with L_C the mean of L over C, by enumerating every
/// τ-subset. For τ = 1 this is L_max.
double oracle_L1_max_term(const Eigen::VectorXd& L, Eigen::Index tau);

/// 𝓛₁ from the max-term form:
///   (θ²/n)(qτ/binom(n,τ))·maxterm + θ²(1−q)/n²·L_max.
double oracle_L1(const Eigen::VectorXd& L, Eigen::Index tau, double q);

double binomial(Eigen::Index n, Eigen::Index k);

}  // namespace sagd
