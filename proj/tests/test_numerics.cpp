#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "helpers.hpp"
#include "sagd/error.hpp"
#include "sagd/numerics.hpp"
#include "sagd/rng.hpp"

using namespace sagd;

namespace {

Eigen::MatrixXd random_symmetric(SeededRng& rng, Index n) {
  const Eigen::MatrixXd a = testing::random_matrix(rng, n, n);
  return 0.5 * (a + a.transpose());
}

// Chi-square statistic of observed counts against equal expected counts.
double chi_square(const std::vector<double>& counts, double expected) {
  double s = 0.0;
  for (double c : counts) s += (c - expected) * (c - expected) / expected;
  return s;
}

}  // namespace

TEST_CASE("rng is deterministic per seed and differs across seeds") {
  SeededRng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("rng uniform draws lie in [0, 1) with the right mean") {
  SeededRng rng(7);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double sigma = std::sqrt(1.0 / 12.0 / draws);
  CHECK(std::abs(sum / draws - 0.5) < 4.0 * sigma);
}

TEST_CASE("rng uniform_index is bounded and roughly uniform") {
  SeededRng rng(11);
  std::vector<double> counts(7, 0.0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto k = rng.uniform_index(7);
    REQUIRE(k < 7);
    counts[k] += 1.0;
  }
  // 6 degrees of freedom: the 0.999 quantile is 22.46.
  CHECK(chi_square(counts, draws / 7.0) < 22.46);
  CHECK_THROWS_AS(rng.uniform_index(0), InvalidInput);
}

TEST_CASE("rng normal draws have zero mean and unit variance") {
  SeededRng rng(3);
  const int draws = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(draws));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / draws));
}

TEST_CASE("symmetric_eigen on identity and diagonal matrices") {
  const auto id = symmetric_eigen(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.eigenvalues.isApprox(Eigen::VectorXd::Ones(3)));

  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
  diag.diagonal() << 2.0, 5.0, -1.0;
  const auto e = symmetric_eigen(diag);
  CHECK(e.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(e.eigenvalues(2) == doctest::Approx(5.0));
}

TEST_CASE("symmetric_eigen reconstructs random matrices and matches Eigen") {
  SeededRng rng(5);
  for (Index n : {1, 2, 6, 17, 64}) {
    const Eigen::MatrixXd m = random_symmetric(rng, n);
    const auto e = symmetric_eigen(m);
    const Eigen::MatrixXd back =
        e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
    CHECK((back - m).norm() <= 1e-9 * std::max(1.0, m.norm()));
    for (Index k = 0; k < n; ++k) {
      const double residual =
          (m * e.eigenvectors.col(k) - e.eigenvalues(k) * e.eigenvectors.col(k)).norm();
      CHECK(residual <= 1e-9 * m.norm());
    }
    for (Index k = 1; k < n; ++k) CHECK(e.eigenvalues(k - 1) <= e.eigenvalues(k));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
    CHECK((ref.eigenvalues() - e.eigenvalues).cwiseAbs().maxCoeff() <= 1e-9 * m.norm());
  }
}

TEST_CASE("symmetric_eigen rejects non-symmetric, non-square and non-finite input") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  CHECK_THROWS_AS(symmetric_eigen(m), InvalidInput);
  CHECK_THROWS_AS(symmetric_eigen(Eigen::MatrixXd(2, 3)), InvalidInput);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(symmetric_eigen(bad), InvalidInput);
}

TEST_CASE("solve_spd on the identity and a diagonal system") {
  Eigen::VectorXd b(3);
  b << 1.0, -2.0, 3.5;
  CHECK(solve_spd(Eigen::MatrixXd::Identity(3, 3), b) == b);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m.diagonal() << 2.0, 4.0;
  Eigen::VectorXd rhs(2);
  rhs << 2.0, 8.0;
  const Eigen::VectorXd x = solve_spd(m, rhs);
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(2.0));
}

TEST_CASE("solve_spd residual on random SPD systems up to condition 1e8") {
  SeededRng rng(9);
  for (double cond : {1.0, 1e2, 1e4, 1e6, 1e8}) {
    const Index n = 8;
    const Eigen::MatrixXd g = testing::random_matrix(rng, n, n);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd spectrum(n);
    for (Index i = 0; i < n; ++i)
      spectrum(i) = std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
    Eigen::MatrixXd m = q * spectrum.asDiagonal() * q.transpose();
    m = 0.5 * (m + m.transpose());
    const Eigen::VectorXd b = testing::random_vector(rng, n);
    const Eigen::VectorXd x = solve_spd(m, b);
    const double residual = (m * x - b).norm();
    CHECK(residual <= 64 * std::numeric_limits<double>::epsilon() * m.norm() * x.norm());
    if (cond <= 1e4) CHECK(residual <= 1e-10 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("solve_spd rejects indefinite matrices") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(1, 1) = -1.0;
  CHECK_THROWS_AS(solve_spd(m, Eigen::VectorXd::Ones(2)), NotPositiveDefinite);
}

TEST_CASE("sample_subset returns sorted distinct indices and the full set at tau = n") {
  SeededRng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = sample_subset(rng, 10, 4);
    REQUIRE(s.size() == 4);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::set<Index>(s.begin(), s.end()).size() == 4);
    for (Index j : s) CHECK((j >= 0 && j < 10));
  }
  const auto all = sample_subset(rng, 6, 6);
  for (Index j = 0; j < 6; ++j) CHECK(all[static_cast<std::size_t>(j)] == j);
  CHECK_THROWS_AS(sample_subset(rng, 5, 0), InvalidInput);
  CHECK_THROWS_AS(sample_subset(rng, 5, 6), InvalidInput);
}

TEST_CASE("sample_subset with tau = 1 hits each index with frequency 1/n") {
  SeededRng rng(2);
  SubsetSampler sampler(5);
  const int draws = 100000;
  std::vector<double> counts(5, 0.0);
  for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(sampler.draw(rng, 1)[0])] += 1.0;
  const double p = 0.2;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (double c : counts) CHECK(std::abs(c - draws * p) < 3.5 * sigma);
}

TEST_CASE("sample_subset is uniform over all subsets for small n") {
  SeededRng rng(4);
  SubsetSampler sampler(4);
  std::map<std::vector<Index>, double> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto s = sampler.draw(rng, 2);
    counts[std::vector<Index>(s.begin(), s.end())] += 1.0;
  }
  REQUIRE(counts.size() == 6);
  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (const auto& [subset, c] : counts) CHECK(std::abs(c - draws * p) < 3.5 * sigma);
}

TEST_CASE("subset sampler passes a chi-square test over all subsets for n = 6") {
  SeededRng rng(6);
  SubsetSampler sampler(6);
  std::map<std::vector<Index>, double> counts;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const auto s = sampler.draw(rng, 3);
    counts[std::vector<Index>(s.begin(), s.end())] += 1.0;
  }
  REQUIRE(counts.size() == 20);
  std::vector<double> c;
  for (const auto& kv : counts) c.push_back(kv.second);
  // 19 degrees of freedom: the 0.999 quantile is 43.82.
  CHECK(chi_square(c, draws / 20.0) < 43.82);
}
