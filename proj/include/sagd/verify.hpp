#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sagd/constants.hpp"

namespace sagd {

struct VerifyOptions {
  /// Oracle grids cover n = 2..n_max.
  Eigen::Index n_max = 8;
  /// The closed-form ρ under test; defaults to sketch_residual_rho. Tests
  /// swap in a perturbed formula to check that the suite catches it.
  std::function<double(const InterpolationConfig&)> rho_closed_form;
  /// Random L vectors per (n, τ) in the 𝓛₁ suite.
  int l1_samples = 20;
  std::uint64_t seed = 2024;
};

struct SuiteReport {
  std::string name;
  std::size_t checks = 0;
  std::vector<std::string> failures;  // one entry per failing tuple
  double seconds = 0.0;

  bool passed() const { return failures.empty(); }
};

/// Closed forms against brute-force enumeration, then the property grids of
/// g₁, g₂, q±, the intersection points and the τ = n closed forms.
std::vector<SuiteReport> run_verification(const VerifyOptions& options = {});

SuiteReport verify_theta(const VerifyOptions& options);
SuiteReport verify_expected_projection(const VerifyOptions& options);
SuiteReport verify_rho(const VerifyOptions& options);
SuiteReport verify_L1(const VerifyOptions& options);
SuiteReport verify_g1_monotone();
SuiteReport verify_g2_shape();
SuiteReport verify_q_roots();
SuiteReport verify_q_bounds();
SuiteReport verify_intersections();
SuiteReport verify_gd_interpolation();

}  // namespace sagd
