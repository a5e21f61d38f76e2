#pragma once

#include <Eigen/Core>

namespace sagd {

/// The four scalars every complexity formula consumes.
struct ProfileSummary {
  Eigen::Index n = 0;
  double L_max = 0.0;
  double L_bar = 0.0;
  double mu = 0.0;

  /// 4·L_max/μ, the quantity the planner's windows are written in.
  double kappa_max() const { return 4.0 * L_max / mu; }

  /// Throws InvalidInput unless n ≥ 1, μ > 0 and 0 < L̄ ≤ L_max (1e-12 slack).
  void validate() const;
};

/// Copy of `p` with L̄ replaced by L_max (the lax estimate L_i = L_max).
inline ProfileSummary uniform_smoothness(ProfileSummary p) {
  p.L_bar = p.L_max;
  return p;
}

enum class MuSource { exact_eigen, lambda_lower_bound };

struct SmoothnessProfile {
  Eigen::VectorXd L;  // per-sample L_i
  double L_max = 0.0;
  double L_bar = 0.0;
  double mu = 0.0;
  MuSource mu_source = MuSource::lambda_lower_bound;

  ProfileSummary summary() const {
    return {L.size(), L_max, L_bar, mu};
  }
};

}  // namespace sagd
