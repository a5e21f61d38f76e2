#include "sagd/constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sagd/error.hpp"

namespace sagd {

void ProfileSummary::validate() const {
  if (n < 1) throw InvalidInput("profile: n must be at least 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("profile: mu must be positive");
  if (!(L_bar > 0.0) || !std::isfinite(L_max))
    throw InvalidInput("profile: smoothness constants must be positive");
  if (L_bar > L_max * (1.0 + 1e-12))
    throw InvalidInput("profile: L_bar cannot exceed L_max");
}

void InterpolationConfig::validate() const {
  if (n < 1) throw InvalidInput("n must be at least 1");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("q must lie in [0, 1]");
  if (tau < 1 || tau > n)
    throw InvalidInput("tau must lie in [1, n]; got tau=" + std::to_string(tau) +
                       ", n=" + std::to_string(n));
}

const char* to_string(RhoBranch branch) {
  switch (branch) {
    case RhoBranch::low: return "low";
    case RhoBranch::high: return "high";
    case RhoBranch::boundary: return "boundary";
  }
  return "?";
}

const char* to_string(Conditioning c) { return c == Conditioning::well ? "well" : "bad"; }

double cost_per_iteration(const InterpolationConfig& cfg) {
  cfg.validate();
  return cfg.q * static_cast<double>(cfg.tau - 1) + 1.0;
}

double theta(const InterpolationConfig& cfg) {
  return static_cast<double>(cfg.n) / cost_per_iteration(cfg);
}

double expected_smoothness_L1(const InterpolationConfig& cfg, const ProfileSummary& p) {
  cfg.validate();
  if (cfg.tau == 1 || cfg.q == 0.0) return p.L_max;
  const double n = static_cast<double>(cfg.n);
  const double tau = static_cast<double>(cfg.tau);
  const double q = cfg.q;
  const double th = theta(cfg);
  const double th2 = th * th;
  return th2 / (n * n) * (q * (tau * (n - tau) / (n - 1.0) - 1.0) + 1.0) * p.L_max +
         q * th2 * tau * (tau - 1.0) / (n * (n - 1.0)) * p.L_bar;
}

double expected_smoothness_L1_factored(const InterpolationConfig& cfg,
                                       const ProfileSummary& p) {
  cfg.validate();
  if (cfg.tau == 1 || cfg.q == 0.0) return p.L_max;
  const double n = static_cast<double>(cfg.n);
  const double tau = static_cast<double>(cfg.tau);
  const double q = cfg.q;
  const double c = cost_per_iteration(cfg);
  return ((q * (tau * (n - tau) / (n - 1.0) - 1.0) + 1.0) * p.L_max +
          n * q * tau * (tau - 1.0) / (n - 1.0) * p.L_bar) /
         (c * c);
}

SketchResidual sketch_residual_rho(const InterpolationConfig& cfg) {
  cfg.validate();
  // A single sample: the sketch always sees everything.
  if (cfg.n == 1) return {0.0, RhoBranch::low};

  const double n = static_cast<double>(cfg.n);
  const double tau = static_cast<double>(cfg.tau);
  const double q = cfg.q;
  const double th = theta(cfg);
  const double th2 = th * th;

  const double low = th2 * ((1.0 - q) / n + q * (tau / n) * (n - tau) / (n - 1.0));
  if (cfg.tau == 1) return {low, RhoBranch::low};

  const double excess = th2 * q * (tau / n) * (tau - 1.0) / (n - 1.0) - 1.0;
  const double threshold = (n / tau) * (n - 1.0) / (tau - 1.0);
  const double lhs = q * th2;
  if (std::abs(lhs - threshold) <= 1e-12 * threshold)
    return {low + n * std::max(excess, 0.0), RhoBranch::boundary};
  if (lhs < threshold) return {low, RhoBranch::low};
  return {low + n * excess, RhoBranch::high};
}

double jacobian_smoothness_L2(const InterpolationConfig& cfg, double L_max) {
  return static_cast<double>(cfg.n) * L_max / theta(cfg);
}

double stepsize_alpha(const InterpolationConfig& cfg, const ProfileSummary& p) {
  const double L1 = expected_smoothness_L1(cfg, p);
  const double rho = sketch_residual_rho(cfg).rho;
  const double n = static_cast<double>(cfg.n);
  const double th = theta(cfg);
  return std::min(1.0 / (4.0 * L1), n / (4.0 * p.L_max * rho + p.mu * th * n));
}

MethodConstants total_complexity(const InterpolationConfig& cfg, const ProfileSummary& p) {
  cfg.validate();
  if (!(p.mu > 0.0)) throw InvalidInput("total_complexity: mu must be positive");

  MethodConstants m;
  const double n = static_cast<double>(cfg.n);
  m.cost_per_iter = cost_per_iteration(cfg);
  m.theta = n / m.cost_per_iter;
  m.kappa = 1.0 / m.theta;
  m.L1 = expected_smoothness_L1(cfg, p);
  m.L2 = jacobian_smoothness_L2(cfg, p.L_max);
  const SketchResidual r = sketch_residual_rho(cfg);
  m.rho = r.rho;
  m.rho_branch = r.branch;
  m.alpha = std::min(1.0 / (4.0 * m.L1), n / (4.0 * p.L_max * m.rho + p.mu * m.theta * n));
  m.g1 = 4.0 * m.L1 / p.mu * m.cost_per_iter;
  m.g2 = (m.theta + 4.0 * m.rho * p.L_max / (p.mu * n)) * m.cost_per_iter;
  m.omega_coef = std::max(m.g1, m.g2);
  return m;
}

double complexity_for_accuracy(double omega_coef, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
  return std::ceil(omega_coef * std::log(1.0 / epsilon));
}

GdInterpolation gd_interpolation_params(const ProfileSummary& p) {
  p.validate();
  if (p.n <= 2) throw InvalidInput("gd_interpolation_params needs n >= 3");
  const double n = static_cast<double>(p.n);
  const double mu = p.mu;
  const double Lbar = p.L_bar;
  const double Lmax = p.L_max;

  GdInterpolation out;
  if (4.0 * Lbar / mu <= n - 1.0) {
    out.regime = Conditioning::well;
    out.q = 1.0 / ((n - 1.0) * (n - 1.0));
    out.alpha = 1.0 / (4.0 * (1.0 - 2.0 / n) * Lmax + mu * (n - 1.0));
    out.omega_coef = n + (n - 2.0) / (n - 1.0) * 4.0 * Lmax / mu;
  } else {
    out.regime = Conditioning::bad;
    out.q = mu / (4.0 * n * Lbar);
    const double shifted = (4.0 * Lbar + mu) - mu / n;
    out.alpha = shifted * shifted /
                (4.0 * Lbar * (mu * n * shifted + 4.0 * Lmax * (4.0 * Lbar - mu / n)));
    out.omega_coef = n + 4.0 * Lmax / mu * (1.0 - 1.0 / (4.0 * Lbar / mu + 1.0 - 1.0 / n));
  }
  return out;
}

}  // namespace sagd
