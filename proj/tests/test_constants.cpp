#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "sagd/numerics.hpp"
#include "sagd/constants.hpp"
#include "sagd/error.hpp"
#include "sagd/planner.hpp"
#include "sagd/sketch_oracle.hpp"

using namespace sagd;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST_CASE("theta special values and the cost identity") {
  CHECK(theta({0.0, 4, 10}) == 10.0);
  CHECK(theta({1.0, 7, 7}) == 1.0);
  CHECK(theta({0.5, 3, 6}) == doctest::Approx(oracle_theta(6, 3, 0.5)).epsilon(1e-12));
  for (Index n = 1; n <= 30; ++n)
    for (Index tau = 1; tau <= n; ++tau)
      for (double q : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        const InterpolationConfig cfg{q, tau, n};
        CHECK(rel(theta(cfg) * cost_per_iteration(cfg), static_cast<double>(n)) <= 1e-15);
      }
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(theta({-0.1, 1, 5}), InvalidInput);
  CHECK_THROWS_AS(theta({1.1, 1, 5}), InvalidInput);
  CHECK_THROWS_AS(theta({0.5, 0, 5}), InvalidInput);
  CHECK_THROWS_AS(theta({0.5, 6, 5}), InvalidInput);
  CHECK_THROWS_AS(total_complexity({0.5, 2, 5}, {5, 1.0, 1.0, 0.0}), InvalidInput);
  CHECK_THROWS_AS(ProfileSummary({5, 1.0, 2.0, 0.1}).validate(), InvalidInput);
}

TEST_CASE("expected smoothness reductions") {
  const ProfileSummary p{20, 3.0, 1.5, 0.1};
  CHECK(expected_smoothness_L1({0.0, 5, 20}, p) == 3.0);
  CHECK(expected_smoothness_L1({0.7, 1, 20}, p) == 3.0);
  CHECK(expected_smoothness_L1({1.0, 20, 20}, p) == doctest::Approx(1.5).epsilon(1e-14));

  const ProfileSummary u = uniform_smoothness(p);
  for (Index tau = 1; tau <= 20; ++tau)
    for (double q : {0.0, 0.2, 0.6, 1.0}) {
      const double c = q * (tau - 1) + 1;
      const double lemma = (q * (static_cast<double>(tau * tau) - 1.0) + 1.0) / (c * c) * 3.0;
      CHECK(rel(expected_smoothness_L1({q, tau, 20}, u), lemma) <= 1e-14);
      CHECK(rel(expected_smoothness_L1({q, tau, 20}, p),
                expected_smoothness_L1_factored({q, tau, 20}, p)) <= 1e-13);
    }
}

TEST_CASE("expected smoothness matches subset enumeration at n = 6, tau = 3, q = 0.4") {
  SeededRng rng(21);
  Eigen::VectorXd L(6);
  for (Index i = 0; i < 6; ++i) L(i) = 0.5 + rng.uniform();
  const ProfileSummary p{6, L.maxCoeff(), L.mean(), 1.0};
  CHECK(rel(expected_smoothness_L1({0.4, 3, 6}, p), oracle_L1(L, 3, 0.4)) <= 1e-9);
}

TEST_CASE("sketch residual examples") {
  CHECK(sketch_residual_rho({0.0, 1, 10}).rho == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(std::abs(sketch_residual_rho({1.0, 9, 9}).rho) <= 1e-12);
  for (Index n : {3, 10, 100, 1000}) {
    const double q = 1.0 / ((n - 1.0) * (n - 1.0));
    CHECK(rel(sketch_residual_rho({q, n, n}).rho, static_cast<double>(n - 2)) <= 1e-9);
  }
  CHECK(sketch_residual_rho({0.0, 1, 1}).rho == 0.0);
  CHECK(sketch_residual_rho({0.3, 1, 10}).branch == RhoBranch::low);
}

TEST_CASE("sketch residual is continuous at the branch switch and nonnegative") {
  for (Index n : {5, 10, 50, 300}) {
    for (Index tau = 2; tau <= n; ++tau) {
      const auto roots = q_plus_minus(tau, n);
      if (!roots) continue;
      for (double q : {roots->q_minus, roots->q_plus}) {
        if (q < 0.0 || q > 1.0) continue;
        const double nd = n, t = tau;
        const double th = nd / (q * (t - 1) + 1);
        const double low = th * th * ((1 - q) / nd + q * (t / nd) * (nd - t) / (nd - 1));
        const double high = low + nd * (th * th * q * (t / nd) * (t - 1) / (nd - 1) - 1);
        CHECK(std::abs(low - high) <= 1e-9 * std::max(1.0, low));
        CHECK(std::abs(sketch_residual_rho({q, tau, n}).rho - low) <= 1e-9 * std::max(1.0, low));
      }
      for (int k = 0; k <= 50; ++k) CHECK(sketch_residual_rho({k / 50.0, tau, n}).rho >= -1e-12);
    }
  }
}

TEST_CASE("jacobian smoothness") {
  CHECK(jacobian_smoothness_L2({0.0, 1, 10}, 2.0) == 2.0);
  CHECK(jacobian_smoothness_L2({1.0, 10, 10}, 2.0) == 20.0);
  for (double q : {0.1, 0.5, 0.9}) {
    const InterpolationConfig cfg{q, 4, 10};
    CHECK(rel(jacobian_smoothness_L2(cfg, 2.0) * theta(cfg), 20.0) <= 1e-15);
  }
}

TEST_CASE("stepsize closed forms") {
  const ProfileSummary p{50, 2.0, 2.0, 0.01};
  CHECK(rel(stepsize_alpha({0.0, 1, 50}, p), 1.0 / (4 * 2.0 + 0.01 * 50)) <= 1e-14);
  const double q = 1.0 / (49.0 * 49.0);
  const double L1 = expected_smoothness_L1({q, 50, 50}, p);
  const double noise_term = 1.0 / (4 * (1 - 2.0 / 50) * 2.0 + 0.01 * 49);
  CHECK(rel(stepsize_alpha({q, 50, 50}, p), std::min(1.0 / (4 * L1), noise_term)) <= 1e-12);
  CHECK(rel(stepsize_alpha({q, 50, 50}, {50, 2.0, 2.0, 1.0}),
            1.0 / (4 * (1 - 2.0 / 50) * 2.0 + 49.0)) <= 1e-12);
}

TEST_CASE("the badly conditioned stepsize closed form matches the general stepsize") {
  for (Index n : {10, 100, 1000}) {
    for (double kappa_bar : {1.5 * n, 4.0 * n, 40.0 * n}) {
      for (double ratio : {1.0, 0.6, 0.2}) {
        const double L_max = 1.0;
        const double L_bar = ratio;
        const double mu = 4.0 * L_bar / kappa_bar;
        const ProfileSummary p{n, L_max, L_bar, mu};
        const GdInterpolation gd = gd_interpolation_params(p);
        REQUIRE(gd.regime == Conditioning::bad);
        CHECK(gd.q == doctest::Approx(mu / (4.0 * n * L_bar)));
        CHECK(rel(gd.alpha, stepsize_alpha({gd.q, n, n}, p)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("total complexity of SAGA and of q = 1") {
  const ProfileSummary p{200, 1.5, 1.5, 0.02};
  const double K = 4 * 1.5 / 0.02;
  CHECK(rel(total_complexity({0.0, 1, 200}, p).omega_coef, 200 + K) <= 1e-14);
  for (Index tau : {1, 2, 17, 100, 200}) {
    const MethodConstants m = total_complexity({1.0, tau, 200}, p);
    CHECK(rel(m.g1, K * tau) <= 1e-12);
    CHECK(rel(m.g2, 200 + K * (200.0 - tau) / 199.0) <= 1e-12);
  }
  CHECK(complexity_for_accuracy(10.0, std::exp(-2.0)) == 20.0);
  CHECK_THROWS_AS(complexity_for_accuracy(10.0, 0.0), InvalidInput);
}

TEST_CASE("well conditioned closed form") {
  const ProfileSummary p{100, 1.0, 1.0, 4.0 / 50.0};
  const GdInterpolation gd = gd_interpolation_params(p);
  CHECK(gd.regime == Conditioning::well);
  CHECK(gd.q == doctest::Approx(1.0 / (99.0 * 99.0)));
  const double K = 50.0;
  CHECK(rel(gd.omega_coef, 100 + 98.0 / 99.0 * K) <= 1e-14);
  CHECK(rel(total_complexity({gd.q, 100, 100}, p).omega_coef, gd.omega_coef) <= 1e-9);
  CHECK_THROWS_AS(gd_interpolation_params({2, 1.0, 1.0, 0.1}), InvalidInput);
}

TEST_CASE("the two regimes differ by K/(n^2 - 1) at the regime boundary") {
  for (Index n : {5, 10, 100, 1000}) {
    const double nd = static_cast<double>(n);
    const double K = nd - 1.0;
    const double well = nd + (nd - 2.0) / (nd - 1.0) * K;
    const double bad = nd + K * (1.0 - 1.0 / (K + 1.0 - 1.0 / nd));
    CHECK(rel(bad - well, K / (nd * nd - 1.0)) <= 1e-6);
    const GdInterpolation gd = gd_interpolation_params({n, 1.0, 1.0, 4.0 / K});
    CHECK(gd.regime == Conditioning::well);
    CHECK(rel(gd.omega_coef, well) <= 1e-12);
  }
}

TEST_CASE("the tau = n interpolation never loses to SAGA and approaches it for large n") {
  for (Index n : {3, 10, 50, 1000}) {
    for (double K : {0.5, 2.0, static_cast<double>(n), 10.0 * n, 1e4}) {
      for (double ratio : {1.0, 0.5, 0.1}) {
        const ProfileSummary p{n, 1.0, ratio, 4.0 / K};
        const GdInterpolation gd = gd_interpolation_params(p);
        CHECK(gd.omega_coef <= (n + K) * (1 + 1e-12));
        CHECK(total_complexity({gd.q, n, n}, p).omega_coef <= (n + K) * (1 + 1e-12));
      }
    }
  }
  double previous = 0.0;
  for (Index n : {10, 100, 1000, 10000, 100000}) {
    const double K = n - 1.0;
    const double ratio = gd_interpolation_params({n, 1.0, 1.0, 4.0 / K}).omega_coef / (n + K);
    CHECK(ratio > previous);
    previous = ratio;
  }
  CHECK(previous > 0.9999);
}
