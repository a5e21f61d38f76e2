#pragma once

#include <Eigen/Core>

#include "sagd/profile.hpp"

namespace sagd {

/// One point (q, τ) of the SAGA / minibatch-SAGA interpolation for n samples.
struct InterpolationConfig {
  double q = 0.0;
  Eigen::Index tau = 1;
  Eigen::Index n = 1;

  /// Throws InvalidInput unless 0 ≤ q ≤ 1 and 1 ≤ τ ≤ n.
  void validate() const;
};

enum class RhoBranch { low, high, boundary };
const char* to_string(RhoBranch branch);

struct SketchResidual {
  double rho = 0.0;
  RhoBranch branch = RhoBranch::low;
};

/// Every constant of the convergence guarantee at one (q, τ).
struct MethodConstants {
  double theta = 0.0;          // bias correction n / (q(τ−1)+1)
  double cost_per_iter = 0.0;  // expected gradients per step, q(τ−1)+1
  double L1 = 0.0;             // expected smoothness of the gradient estimate
  double L2 = 0.0;             // expected smoothness of the Jacobian sketch
  double kappa = 0.0;          // stochastic condition number, 1/θ
  double rho = 0.0;            // sketch residual
  RhoBranch rho_branch = RhoBranch::low;
  double alpha = 0.0;          // stepsize
  double omega_coef = 0.0;     // total complexity / log(1/ε)
  double g1 = 0.0;
  double g2 = 0.0;
};

double cost_per_iteration(const InterpolationConfig& cfg);
double theta(const InterpolationConfig& cfg);

/// 𝓛₁. Evaluated in the per-term form
///   (θ²/n²)(q(τ(n−τ)/(n−1) − 1) + 1)·L_max + qθ²·τ(τ−1)/(n(n−1))·L̄,
/// which reduces to L_max at q = 0 or τ = 1.
double expected_smoothness_L1(const InterpolationConfig& cfg, const ProfileSummary& p);

/// The same 𝓛₁ written over a common denominator (q(τ−1)+1)². Kept as a second
/// algebraic route so tests can check the two agree.
double expected_smoothness_L1_factored(const InterpolationConfig& cfg,
                                       const ProfileSummary& p);

/// Sketch residual ρ = λ_max(θ²E[Π_S e eᵀ Π_S] − eeᵀ) in closed form.
///
/// low branch  (qθ² ≤ (n/τ)(n−1)/(τ−1)): θ²((1−q)/n + q(τ/n)(n−τ)/(n−1))
/// high branch: the low value plus n(θ²q(τ/n)(τ−1)/(n−1) − 1).
/// τ = 1 is always low. Values within 1e-12 relative of the threshold are
/// reported as `boundary`, where both expressions coincide.
SketchResidual sketch_residual_rho(const InterpolationConfig& cfg);

/// 𝓛₂ = n·L_max/θ.
double jacobian_smoothness_L2(const InterpolationConfig& cfg, double L_max);

/// α = min{1/(4𝓛₁), n/(4L_max·ρ + μθn)}.
double stepsize_alpha(const InterpolationConfig& cfg, const ProfileSummary& p);

/// All constants, with g₁ = (4𝓛₁/μ)(q(τ−1)+1), g₂ = (θ + 4ρL_max/(μn))(q(τ−1)+1)
/// and omega_coef = max(g₁, g₂).
MethodConstants total_complexity(const InterpolationConfig& cfg, const ProfileSummary& p);

/// Iterations needed for a 1/ε reduction: ceil(omega_coef · ln(1/ε)).
double complexity_for_accuracy(double omega_coef, double epsilon);

enum class Conditioning { well, bad };
const char* to_string(Conditioning c);

/// Closed-form choice of q at τ = n (probabilistic SAGA / gradient-descent mix).
struct GdInterpolation {
  double q = 0.0;
  double alpha = 0.0;
  double omega_coef = 0.0;
  Conditioning regime = Conditioning::well;
};

/// Well conditioned (4L̄/μ ≤ n−1): q = 1/(n−1)², α = 1/(4(1−2/n)L_max + μ(n−1)),
///   Ω = n + ((n−2)/(n−1))·4L_max/μ.
/// Badly conditioned: q = μ/(4nL̄), α in closed form,
///   Ω = n + (4L_max/μ)(1 − 1/(4L̄/μ + 1 − 1/n)).
/// Requires n ≥ 3.
GdInterpolation gd_interpolation_params(const ProfileSummary& p);

}  // namespace sagd
