#include "sagd/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>

#include "sagd/error.hpp"
#include "sagd/planner.hpp"
#include "sagd/rng.hpp"
#include "sagd/sketch_oracle.hpp"

namespace sagd {

namespace {

using Eigen::Index;

constexpr int kOracleQSteps = 20;  // q ∈ {0, 0.05, …, 1}
constexpr int kShapeQSteps = 1000;  // q ∈ {0, 0.001, …, 1}
constexpr double kSlack = 1e-9;

const Index kShapeSizes[] = {10, 100, 1000};

std::string tuple(Index n, Index tau, double q) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(n=%ld, tau=%ld, q=%.6g)", static_cast<long>(n),
                static_cast<long>(tau), q);
  return buf;
}

std::string detail(const char* what, double got, double want) {
  char buf[128];
  std::snprintf(buf, sizeof buf, " %s: got %.17g, want %.17g", what, got, want);
  return buf;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Condition numbers K = 4L_max/μ spread across both sides of n.
std::vector<double> shape_kappas(Index n) {
  const double nd = static_cast<double>(n);
  return {nd / 4.0, nd / 2.0, nd - 1.0, 2.0 * nd, 4.0 * nd};
}

std::vector<Index> shape_taus(Index n, Index first) {
  const Index step = std::max<Index>(1, n / 25);
  std::vector<Index> taus;
  for (Index t = first; t <= n; t += step) taus.push_back(t);
  if (taus.back() != n) taus.push_back(n);
  return taus;
}

ProfileSummary uniform_profile(Index n, double kappa) {
  return ProfileSummary{n, 1.0, 1.0, 4.0 / kappa};
}

double grid_q(int k, int steps) { return static_cast<double>(k) / static_cast<double>(steps); }

template <typename Body>
SuiteReport timed(const char* name, Body&& body) {
  SuiteReport report;
  report.name = name;
  const auto start = std::chrono::steady_clock::now();
  body(report);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

template <typename Body>
void oracle_grid(const VerifyOptions& options, Body&& body) {
  for (Index n = 2; n <= options.n_max; ++n)
    for (Index tau = 1; tau <= n; ++tau)
      for (int k = 0; k <= kOracleQSteps; ++k) body(n, tau, grid_q(k, kOracleQSteps));
}

}  // namespace

SuiteReport verify_theta(const VerifyOptions& options) {
  return timed("theta", [&](SuiteReport& r) {
    oracle_grid(options, [&](Index n, Index tau, double q) {
      const double closed = theta({q, tau, n});
      const double oracle = oracle_theta(n, tau, q);
      ++r.checks;
      if (std::abs(closed - oracle) > 1e-12 * std::max(1.0, oracle))
        r.failures.push_back(tuple(n, tau, q) + detail("theta", closed, oracle));
    });
  });
}

SuiteReport verify_expected_projection(const VerifyOptions& options) {
  return timed("expected_projection", [&](SuiteReport& r) {
    oracle_grid(options, [&](Index n, Index tau, double q) {
      const Eigen::MatrixXd e = oracle_E_PiS(n, tau, q);
      const Eigen::MatrixXd want =
          Eigen::MatrixXd::Identity(n, n) / theta({q, tau, n});
      const double gap = (e - want).cwiseAbs().maxCoeff();
      ++r.checks;
      if (gap > 1e-12) r.failures.push_back(tuple(n, tau, q) + detail("max entry gap", gap, 0.0));
    });
  });
}

SuiteReport verify_rho(const VerifyOptions& options) {
  auto closed_form = options.rho_closed_form;
  if (!closed_form)
    closed_form = [](const InterpolationConfig& cfg) { return sketch_residual_rho(cfg).rho; };
  return timed("rho", [&](SuiteReport& r) {
    oracle_grid(options, [&](Index n, Index tau, double q) {
      const double closed = closed_form({q, tau, n});
      const double oracle = oracle_rho(n, tau, q);
      ++r.checks;
      if (std::abs(closed - oracle) > 1e-9 * std::max(1.0, oracle))
        r.failures.push_back(tuple(n, tau, q) + detail("rho", closed, oracle));
    });
  });
}

SuiteReport verify_L1(const VerifyOptions& options) {
  return timed("expected_smoothness", [&](SuiteReport& r) {
    SeededRng rng(options.seed);
    for (Index n = 2; n <= options.n_max; ++n) {
      for (Index tau = 1; tau <= n; ++tau) {
        for (int s = 0; s < options.l1_samples; ++s) {
          Eigen::VectorXd L(n);
          for (Index i = 0; i < n; ++i) L(i) = 0.1 + 2.0 * rng.uniform();
          const ProfileSummary p{n, L.maxCoeff(), L.mean(), 1.0};
          for (int k = 0; k <= kOracleQSteps; ++k) {
            const double q = grid_q(k, kOracleQSteps);
            const double closed = expected_smoothness_L1({q, tau, n}, p);
            const double oracle = oracle_L1(L, tau, q);
            ++r.checks;
            if (std::abs(closed - oracle) > 1e-9 * std::abs(oracle))
              r.failures.push_back(tuple(n, tau, q) + " sample " + std::to_string(s) +
                                   detail("L1", closed, oracle));
          }
        }
      }
    }
  });
}

SuiteReport verify_g1_monotone() {
  return timed("g1_monotone", [](SuiteReport& r) {
    for (Index n : kShapeSizes) {
      for (double kappa : shape_kappas(n)) {
        for (double ratio : {1.0, 0.5}) {
          ProfileSummary p = uniform_profile(n, kappa);
          p.L_bar = ratio;
          for (Index tau : shape_taus(n, 1)) {
            double previous = total_complexity({0.0, tau, n}, p).g1;
            for (int k = 1; k <= kShapeQSteps; ++k) {
              const double q = grid_q(k, kShapeQSteps);
              const double g1 = total_complexity({q, tau, n}, p).g1;
              ++r.checks;
              if (g1 < previous - kSlack * std::max(1.0, std::abs(previous)))
                r.failures.push_back(tuple(n, tau, q) + detail("g1 dropped to", g1, previous));
              previous = g1;
            }
          }
        }
      }
    }
  });
}

SuiteReport verify_g2_shape() {
  return timed("g2_shape", [](SuiteReport& r) {
    for (Index n : kShapeSizes) {
      for (double kappa : shape_kappas(n)) {
        const ProfileSummary p = uniform_profile(n, kappa);
        for (Index tau : shape_taus(n, 2)) {
          double lo = 1.0;  // without real roots the whole interval is decreasing
          double hi = 1.0;
          if (const auto roots = q_plus_minus(tau, n)) {
            lo = roots->q_minus;
            hi = roots->q_plus;
          }
          std::vector<double> g(kShapeQSteps + 1);
          for (int k = 0; k <= kShapeQSteps; ++k)
            g[static_cast<std::size_t>(k)] = total_complexity({grid_q(k, kShapeQSteps), tau, n}, p).g2;
          auto inside = [](double a, double b, double x) { return x >= a && x <= b; };
          for (int k = 0; k < kShapeQSteps; ++k) {
            const double a = grid_q(k, kShapeQSteps);
            const double b = grid_q(k + 1, kShapeQSteps);
            const bool decreasing_zone = (inside(0.0, lo, a) && inside(0.0, lo, b)) ||
                                         (inside(hi, 1.0, a) && inside(hi, 1.0, b));
            if (!decreasing_zone) continue;
            const double ga = g[static_cast<std::size_t>(k)];
            const double gb = g[static_cast<std::size_t>(k + 1)];
            ++r.checks;
            if (gb > ga + kSlack * std::max(1.0, std::abs(ga)))
              r.failures.push_back(tuple(n, tau, b) + detail("g2 rose to", gb, ga));
          }
          for (int k = 1; k < kShapeQSteps; ++k) {
            const double a = grid_q(k - 1, kShapeQSteps);
            const double c = grid_q(k + 1, kShapeQSteps);
            if (!(inside(lo, hi, a) && inside(lo, hi, c)) || hi <= lo) continue;
            const double gm = g[static_cast<std::size_t>(k)];
            const double second =
                g[static_cast<std::size_t>(k - 1)] + g[static_cast<std::size_t>(k + 1)] - 2.0 * gm;
            ++r.checks;
            if (second > kSlack * std::max(1.0, std::abs(gm)))
              r.failures.push_back(tuple(n, tau, grid_q(k, kShapeQSteps)) +
                                   detail("g2 second difference", second, 0.0));
          }
        }
      }
    }
  });
}

SuiteReport verify_q_roots() {
  return timed("q_roots", [](SuiteReport& r) {
    for (Index n : kShapeSizes) {
      const double nd = static_cast<double>(n);
      for (Index tau = 2; tau <= n; ++tau) {
        const auto roots = q_plus_minus(tau, n);
        if (!roots) continue;
        const double t = static_cast<double>(tau);
        const double target = (nd / t) * (nd - 1.0) / (t - 1.0);
        for (double q : {roots->q_minus, roots->q_plus}) {
          const double th = nd / (q * (t - 1.0) + 1.0);
          ++r.checks;
          if (std::abs(q * th * th - target) > 1e-9 * target)
            r.failures.push_back(tuple(n, tau, q) + detail("q*theta^2", q * th * th, target));
        }
      }
    }
  });
}

SuiteReport verify_q_bounds() {
  return timed("q_bounds", [](SuiteReport& r) {
    for (Index n : kShapeSizes) {
      const double nd = static_cast<double>(n);
      const double rn = std::sqrt(nd);
      const double floor_minus = 1.0 / ((nd - 1.0) * (nd - 1.0));
      const double cap_minus = (nd + 1.0 - 2.0 * rn) / (3.0 * (nd - 1.0));
      const double floor_plus = (nd + 1.0 + 2.0 * rn) / (3.0 * (nd - 1.0));
      const double chain[] = {cap_minus, 1.0 / 3.0, floor_plus};
      ++r.checks;
      if (!(chain[0] <= chain[1] && chain[1] <= chain[2]))
        r.failures.push_back("n=" + std::to_string(n) + ": constant part of the chain fails");

      std::optional<QRoots> previous;
      for (Index tau = 4; tau <= n; ++tau) {
        const auto roots = q_plus_minus(tau, n);
        ++r.checks;
        if (!roots) {
          r.failures.push_back(tuple(n, tau, 0.0) + " no real roots");
          continue;
        }
        const double tol = 1e-12;
        if (roots->q_minus < floor_minus * (1.0 - tol) || roots->q_minus > cap_minus * (1.0 + tol))
          r.failures.push_back(tuple(n, tau, roots->q_minus) + " q_minus outside its bounds");
        if (roots->q_plus < floor_plus * (1.0 - tol) || roots->q_plus > 1.0 + tol)
          r.failures.push_back(tuple(n, tau, roots->q_plus) + " q_plus outside its bounds");
        if (previous) {
          if (roots->q_minus > previous->q_minus * (1.0 + tol))
            r.failures.push_back(tuple(n, tau, roots->q_minus) + " q_minus increased in tau");
          if (roots->q_plus < previous->q_plus * (1.0 - tol))
            r.failures.push_back(tuple(n, tau, roots->q_plus) + " q_plus decreased in tau");
        }
        previous = roots;
      }
    }
  });
}

SuiteReport verify_intersections() {
  return timed("intersections", [](SuiteReport& r) {
    for (Index n : kShapeSizes) {
      for (double kappa : shape_kappas(n)) {
        const ProfileSummary p = uniform_profile(n, kappa);
        for (Index tau = 2; tau <= n; ++tau) {
          const auto cross = q_intersection(tau, n, p.L_max, p.mu);
          if (!cross) continue;
          const MethodConstants m = total_complexity({cross->q, tau, n}, p);
          ++r.checks;
          if (std::abs(m.g1 - m.g2) > 1e-6 * std::max(m.g1, m.g2))
            r.failures.push_back(tuple(n, tau, cross->q) + " " + to_string(cross->kind) +
                                 detail("g1 vs g2", m.g1, m.g2));
        }
      }
    }
  });
}

SuiteReport verify_gd_interpolation() {
  return timed("gd_interpolation", [](SuiteReport& r) {
    for (Index n : kShapeSizes) {
      const double nd = static_cast<double>(n);
      for (double kappa : {nd / 4.0, nd - 1.0, 4.0 * nd}) {
        for (double ratio : {0.5, 1.0}) {
          ProfileSummary p = uniform_profile(n, kappa);
          p.L_bar = ratio;
          const GdInterpolation gd = gd_interpolation_params(p);
          const MethodConstants m = total_complexity({gd.q, n, n}, p);
          const std::string where = tuple(n, n, gd.q) + " K=" + std::to_string(kappa) +
                                    " Lbar/Lmax=" + std::to_string(ratio) + " " +
                                    to_string(gd.regime);
          r.checks += 3;
          if (rel_gap(m.omega_coef, gd.omega_coef) > 1e-9)
            r.failures.push_back(where + detail("omega", m.omega_coef, gd.omega_coef));
          if (std::abs(m.alpha - gd.alpha) > 1e-9 * gd.alpha)
            r.failures.push_back(where + detail("alpha", m.alpha, gd.alpha));
          if (m.omega_coef > (nd + kappa) * (1.0 + 1e-12))
            r.failures.push_back(where + detail("omega above SAGA", m.omega_coef, nd + kappa));
        }
      }
    }
  });
}

std::vector<SuiteReport> run_verification(const VerifyOptions& options) {
  if (options.n_max < 2 || options.n_max > kMaxEnumerableN)
    throw InvalidInput("verify: n_max must lie in [2, " + std::to_string(kMaxEnumerableN) + "]");
  return {verify_theta(options),  verify_expected_projection(options),
          verify_rho(options),    verify_L1(options),
          verify_g1_monotone(),   verify_g2_shape(),
          verify_q_roots(),       verify_q_bounds(),
          verify_intersections(), verify_gd_interpolation()};
}

}  // namespace sagd
