#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sagd/constants.hpp"
#include "sagd/profile.hpp"

namespace sagd {

enum class CandidateKind { one, q_minus, q_i1, q_i2, saga_baseline };
const char* to_string(CandidateKind kind);

struct PlanCandidate {
  Eigen::Index tau = 1;
  CandidateKind kind = CandidateKind::one;
  double q = 0.0;
  double omega_coef = 0.0;  // under L_i = L_max
  double alpha = 0.0;       // from the true profile (L̄ as measured)
  /// q₋ at τ ∈ {2, 3}: a real root, but outside the range where its bounds
  /// are established.
  bool unproven_range = false;
};

struct Plan {
  PlanCandidate best;
  std::vector<PlanCandidate> candidates;
  double saga_omega = 0.0;  // Ω at (q, τ) = (0, 1)
  Eigen::Index tau_star_q1 = 1;
  ProfileSummary profile;
};

struct QRoots {
  double q_minus = 0.0;
  double q_plus = 0.0;
};

/// Roots of qθ(q)² = (n/τ)(n−1)/(τ−1), where ρ switches branch:
///   q± = (nτ + 2(1−n) ± √(nτ)·√(4(1−n) + nτ)) / (2(n−1)(τ−1)).
/// Empty when τ = 1 or the discriminant 4(1−n) + nτ is negative.
std::optional<QRoots> q_plus_minus(Eigen::Index tau, Eigen::Index n);

struct TauWindow {
  double tau_min = 0.0;
  double tau_max = 0.0;
};

/// τ_min = n/K + 1 − 1/K with K = 4L_max/μ; τ_max = min(n(n−1)/((n−K)K), n)
/// when n > K, else n.
TauWindow tau_window(Eigen::Index n, double L_max, double mu);

struct Intersection {
  CandidateKind kind = CandidateKind::q_i1;
  double q = 0.0;
};

/// The q at which g₁ and g₂ cross for this τ (uniform smoothness):
///   τ ∈ [τ_min, τ_max]: q_i1 = (n−1)/((τ−1)(τK + 1 − n))
///   τ ∈ (τ_max, n]:     q_i2 = (n − K)/(K(τ−1))
/// Empty outside both windows, for τ = 1, or when q falls outside [0, 1].
std::optional<Intersection> q_intersection(Eigen::Index tau, Eigen::Index n, double L_max,
                                           double mu);

/// Minibatch size minimizing Ω at q = 1: round(1 + μ(n−1)/(4L_max)), clamped
/// to [1, n], rounding half away from zero.
Eigen::Index tau_star_for_q1(Eigen::Index n, double mu, double L_max);

/// Evaluates the closed-form candidate set (q = 1; q₋; q_i1; q_i2) for every
/// τ and returns the minimizer of Ω. The SAGA point (0, 1) is listed as a
/// labelled baseline. Ties go to the larger τ, then the smaller q.
Plan optimal_plan(const ProfileSummary& profile);

}  // namespace sagd
