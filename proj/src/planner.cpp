#include "sagd/planner.hpp"

#include <cmath>

#include "sagd/error.hpp"

namespace sagd {

using Eigen::Index;

const char* to_string(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::one: return "ONE";
    case CandidateKind::q_minus: return "Q_MINUS";
    case CandidateKind::q_i1: return "Q_I1";
    case CandidateKind::q_i2: return "Q_I2";
    case CandidateKind::saga_baseline: return "SAGA_BASELINE";
  }
  return "?";
}

std::optional<QRoots> q_plus_minus(Index tau, Index n) {
  if (n < 2 || tau < 1 || tau > n) throw InvalidInput("q_plus_minus needs 1 <= tau <= n, n >= 2");
  if (tau == 1) return std::nullopt;
  const double nd = static_cast<double>(n);
  const double t = static_cast<double>(tau);
  const double disc = 4.0 * (1.0 - nd) + nd * t;
  if (disc < 0.0) return std::nullopt;
  const double centre = nd * t + 2.0 * (1.0 - nd);
  const double spread = std::sqrt(nd * t) * std::sqrt(disc);
  const double denom = 2.0 * (nd - 1.0) * (t - 1.0);
  // The product of the roots is 1/(τ−1)², so q₋ is recovered from q₊ to
  // avoid cancellation in centre − spread.
  const double q_plus = (centre + spread) / denom;
  const double q_minus = 1.0 / ((t - 1.0) * (t - 1.0) * q_plus);
  return QRoots{q_minus, q_plus};
}

TauWindow tau_window(Index n, double L_max, double mu) {
  if (!(mu > 0.0) || !(L_max > 0.0)) throw InvalidInput("tau_window needs mu, L_max > 0");
  const double nd = static_cast<double>(n);
  const double k = 4.0 * L_max / mu;
  TauWindow w;
  w.tau_min = nd / k + 1.0 - 1.0 / k;
  w.tau_max = nd > k ? std::min(nd * (nd - 1.0) / ((nd - k) * k), nd) : nd;
  return w;
}

std::optional<Intersection> q_intersection(Index tau, Index n, double L_max, double mu) {
  if (tau < 1 || tau > n) throw InvalidInput("q_intersection needs 1 <= tau <= n");
  if (tau == 1) return std::nullopt;
  const TauWindow w = tau_window(n, L_max, mu);
  const double nd = static_cast<double>(n);
  const double t = static_cast<double>(tau);
  const double k = 4.0 * L_max / mu;

  Intersection out;
  if (t >= w.tau_min && t <= w.tau_max) {
    const double denom = (t - 1.0) * (t * k + 1.0 - nd);
    if (denom == 0.0) return std::nullopt;
    out = {CandidateKind::q_i1, (nd - 1.0) / denom};
  } else if (t > w.tau_max) {
    out = {CandidateKind::q_i2, (nd - k) / (k * (t - 1.0))};
  } else {
    return std::nullopt;
  }
  if (!(out.q >= 0.0 && out.q <= 1.0)) return std::nullopt;
  return out;
}

Index tau_star_for_q1(Index n, double mu, double L_max) {
  if (!(mu > 0.0) || !(L_max > 0.0)) throw InvalidInput("tau_star_for_q1 needs mu, L_max > 0");
  const double raw = std::round(1.0 + mu * static_cast<double>(n - 1) / (4.0 * L_max));
  return static_cast<Index>(std::clamp(raw, 1.0, static_cast<double>(n)));
}

namespace {

bool better(const PlanCandidate& a, const PlanCandidate& b) {
  if (a.omega_coef != b.omega_coef) return a.omega_coef < b.omega_coef;
  if (a.tau != b.tau) return a.tau > b.tau;
  return a.q < b.q;
}

}  // namespace

Plan optimal_plan(const ProfileSummary& profile) {
  profile.validate();
  const Index n = profile.n;
  if (n < 2) throw InvalidInput("optimal_plan needs n >= 2");
  const ProfileSummary lax = uniform_smoothness(profile);

  auto make = [&](Index tau, CandidateKind kind, double q) {
    const InterpolationConfig cfg{q, tau, n};
    PlanCandidate c;
    c.tau = tau;
    c.kind = kind;
    c.q = q;
    c.omega_coef = total_complexity(cfg, lax).omega_coef;
    c.alpha = stepsize_alpha(cfg, profile);
    return c;
  };

  Plan plan;
  plan.profile = profile;
  plan.tau_star_q1 = tau_star_for_q1(n, profile.mu, profile.L_max);

  // q = 1: the rounded crossing point, plus the scanned minimizer when
  // rounding lands off the discrete optimum.
  const PlanCandidate rounded = make(plan.tau_star_q1, CandidateKind::one, 1.0);
  plan.candidates.push_back(rounded);
  Index scan_tau = plan.tau_star_q1;
  double scan_omega = rounded.omega_coef;
  for (Index tau = 1; tau <= n; ++tau) {
    const double omega = total_complexity({1.0, tau, n}, lax).omega_coef;
    if (omega < scan_omega) {
      scan_omega = omega;
      scan_tau = tau;
    }
  }
  if (scan_tau != plan.tau_star_q1) plan.candidates.push_back(make(scan_tau, CandidateKind::one, 1.0));

  for (Index tau = 2; tau <= n; ++tau) {
    if (const auto roots = q_plus_minus(tau, n)) {
      if (roots->q_minus >= 0.0 && roots->q_minus <= 1.0) {
        PlanCandidate c = make(tau, CandidateKind::q_minus, roots->q_minus);
        c.unproven_range = tau < 4;
        plan.candidates.push_back(c);
      }
    }
    if (const auto cross = q_intersection(tau, n, profile.L_max, profile.mu))
      plan.candidates.push_back(make(tau, cross->kind, cross->q));
  }

  PlanCandidate saga = make(1, CandidateKind::saga_baseline, 0.0);
  plan.saga_omega = saga.omega_coef;
  plan.candidates.push_back(saga);

  plan.best = plan.candidates.front();
  for (const auto& c : plan.candidates)
    if (better(c, plan.best)) plan.best = c;
  return plan;
}

}  // namespace sagd
