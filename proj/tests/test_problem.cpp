#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

#include "helpers.hpp"
#include "sagd/numerics.hpp"
#include "sagd/error.hpp"
#include "sagd/problem.hpp"

using namespace sagd;

namespace {

double fd_derivative(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x, Index k) {
  const double h = 1e-6 * (1.0 + x.norm());
  Eigen::VectorXd up = x, down = x;
  up(k) += h;
  down(k) -= h;
  return (f(up) - f(down)) / (2.0 * h);
}

}  // namespace

TEST_CASE("ridge gradient at zero and at an interpolating point") {
  const Dataset data = testing::random_ridge(4, 3, 1);
  const LossSpec loss{LossKind::ridge, 0.0};
  const Eigen::VectorXd g = grad_i(data, loss, Eigen::VectorXd::Zero(3), 2);
  const Eigen::VectorXd want = -data.labels(2) * Eigen::VectorXd(data.rows.row(2).transpose());
  CHECK((g - want).norm() <= 1e-15);

  Eigen::MatrixXd a(1, 2);
  a << 1.0, 2.0;
  Eigen::VectorXd y(1);
  y << 5.0;
  const Dataset one = testing::dataset_from(a, y);
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  CHECK(grad_i(one, loss, x, 0).norm() == 0.0);
}

TEST_CASE("per-sample gradients match central finite differences") {
  for (LossKind kind : {LossKind::ridge, LossKind::logistic}) {
    const Dataset data =
        kind == LossKind::ridge ? testing::random_ridge(6, 4, 2) : testing::random_logistic(6, 4, 2);
    const LossSpec loss{kind, 0.3};
    SeededRng rng(8);
    const Eigen::VectorXd x = testing::random_vector(rng, 4);
    for (Index i = 0; i < data.n(); ++i) {
      const Eigen::VectorXd g = grad_i(data, loss, x, i);
      for (Index k = 0; k < 4; ++k) {
        const double fd = fd_derivative(
            [&](const Eigen::VectorXd& z) { return loss_i(data, loss, z, i); }, x, k);
        CHECK(std::abs(g(k) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("full gradient is the mean of per-sample gradients and the objective's derivative") {
  for (LossKind kind : {LossKind::ridge, LossKind::logistic}) {
    const Dataset data =
        kind == LossKind::ridge ? testing::random_ridge(9, 3, 3) : testing::random_logistic(9, 3, 3);
    const LossSpec loss{kind, 0.1};
    SeededRng rng(4);
    const Eigen::VectorXd x = testing::random_vector(rng, 3);
    const Eigen::VectorXd g = full_grad(data, loss, x);
    CHECK((g - grad_matrix(data, loss, x).rowwise().mean()).norm() <= 1e-14);
    for (Index k = 0; k < 3; ++k) {
      const double fd =
          fd_derivative([&](const Eigen::VectorXd& z) { return objective(data, loss, z); }, x, k);
      CHECK(std::abs(g(k) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
  const Dataset single = testing::random_ridge(1, 3, 5);
  const LossSpec loss{LossKind::ridge, 0.2};
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.7);
  CHECK((full_grad(single, loss, x) - grad_i(single, loss, x, 0)).norm() <= 1e-15);
}

TEST_CASE("objective special cases") {
  const Dataset data = testing::random_ridge(5, 3, 6);
  CHECK(objective(data, {LossKind::ridge, 0.0}, Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(data.labels.squaredNorm() / 10.0));

  const Dataset id = testing::dataset_from(Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4));
  Eigen::VectorXd x(4);
  x << 1.0, -2.0, 0.5, 3.0;
  CHECK(objective(id, {LossKind::ridge, 0.0}, x) == doctest::Approx(x.squaredNorm() / 8.0));

  const Dataset logit = testing::random_logistic(7, 3, 6);
  CHECK(objective(logit, {LossKind::logistic, 0.0}, Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(0.5 * std::log(2.0)));
}

TEST_CASE("smoothness profile of normalized ridge rows") {
  const Dataset data = normalize_rows(testing::random_ridge(40, 5, 7));
  const double lambda = 1.0 / 40.0;
  const SmoothnessProfile p = smoothness_profile(data, {LossKind::ridge, lambda});
  for (Index i = 0; i < 40; ++i) CHECK(p.L(i) == doctest::Approx(1.0 + lambda).epsilon(1e-14));
  CHECK(p.L_max == doctest::Approx(1.0 + lambda).epsilon(1e-14));
  CHECK(p.L_bar == doctest::Approx(1.0 + lambda).epsilon(1e-14));
  CHECK(p.mu > 0.0);
  CHECK(p.mu <= p.L_bar);
}

TEST_CASE("smoothness profile strong convexity from the Hessian") {
  const Dataset id = testing::dataset_from(Eigen::MatrixXd::Identity(6, 6), Eigen::VectorXd::Ones(6));
  CHECK(smoothness_profile(id, {LossKind::ridge, 0.5}).mu == doctest::Approx(1.0 / 6.0 + 0.5));

  const Dataset data = testing::random_ridge(50, 10, 8);
  const double lambda = 0.01;
  const SmoothnessProfile p = smoothness_profile(data, {LossKind::ridge, lambda});
  const Eigen::MatrixXd a = Eigen::MatrixXd(data.rows);
  Eigen::MatrixXd h = a.transpose() * a / 50.0;
  h.diagonal().array() += lambda;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(h);
  CHECK(std::abs(p.mu - ref.eigenvalues()(0)) <= 1e-9);
  CHECK(p.mu_source == MuSource::exact_eigen);

  const SmoothnessProfile capped = smoothness_profile(data, {LossKind::ridge, lambda}, 5);
  CHECK(capped.mu == lambda);
  CHECK(capped.mu_source == MuSource::lambda_lower_bound);
}

TEST_CASE("logistic smoothness carries the one-eighth curvature bound") {
  const Dataset data = testing::random_logistic(10, 4, 9);
  const SmoothnessProfile p = smoothness_profile(data, {LossKind::logistic, 0.05});
  for (Index i = 0; i < 10; ++i)
    CHECK(p.L(i) == doctest::Approx(data.rows.row(i).squaredNorm() / 8.0 + 0.05));
  CHECK(p.mu == 0.05);
}

TEST_CASE("a singular problem without regularization is rejected") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2);
  a.col(0).setOnes();
  const Dataset data = testing::dataset_from(a, Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(smoothness_profile(data, {LossKind::ridge, 0.0}), NotStronglyConvex);
  CHECK_THROWS_AS(exact_solution(data, {LossKind::ridge, 0.0}), NotStronglyConvex);
}

TEST_CASE("exact solution special cases and gradient norm") {
  const Dataset zero_y = testing::dataset_from(Eigen::MatrixXd::Identity(3, 3) * 2.0,
                                               Eigen::VectorXd::Zero(3));
  CHECK(exact_solution(zero_y, {LossKind::ridge, 0.1}).norm() == 0.0);

  Eigen::VectorXd y(4);
  y << 1.0, -2.0, 3.0, 0.5;
  const Dataset id = testing::dataset_from(Eigen::MatrixXd::Identity(4, 4), y);
  CHECK((exact_solution(id, {LossKind::ridge, 0.0}) - y).norm() <= 1e-14);

  const Dataset data = testing::random_ridge(200, 8, 10);
  const LossSpec loss{LossKind::ridge, 1.0 / 200.0};
  CHECK(full_grad(data, loss, exact_solution(data, loss)).norm() <= 1e-10);

  const Dataset logit = testing::random_logistic(60, 4, 11);
  const LossSpec lloss{LossKind::logistic, 0.05};
  CHECK(full_grad(logit, lloss, exact_solution(logit, lloss, 1e-11)).norm() <= 1e-11);
}

TEST_CASE("normalize_rows scales to unit norm, is idempotent and keeps labels") {
  Eigen::MatrixXd a(2, 2);
  a << 3.0, 4.0, 1.0, 0.0;
  const Dataset data = testing::dataset_from(a, Eigen::Vector2d(1.0, -1.0));
  const Dataset once = normalize_rows(data);
  CHECK(once.rows.coeff(0, 0) == doctest::Approx(0.6));
  CHECK(once.rows.coeff(0, 1) == doctest::Approx(0.8));
  CHECK(once.labels == data.labels);
  CHECK(once.normalized);

  const Dataset random = normalize_rows(testing::random_ridge(30, 6, 12));
  for (Index i = 0; i < 30; ++i) CHECK(std::abs(random.rows.row(i).norm() - 1.0) <= 1e-12);
  const Dataset twice = normalize_rows(random);
  CHECK(Eigen::MatrixXd(twice.rows) == Eigen::MatrixXd(random.rows));

  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(2, 2);
  z.row(1).setZero();
  CHECK_THROWS_AS(normalize_rows(testing::dataset_from(z, Eigen::Vector2d(1, 1))), InvalidInput);
}

TEST_CASE("input validation") {
  Dataset data = testing::random_ridge(3, 2, 13);
  CHECK_THROWS_AS(validate(data, {LossKind::logistic, 0.1}), InvalidInput);
  CHECK_THROWS_AS(validate(data, {LossKind::ridge, -1.0}), InvalidInput);
  CHECK_THROWS_AS(grad_i(data, {LossKind::ridge, 0.1}, Eigen::VectorXd::Zero(2), 3), InvalidInput);
  CHECK_THROWS_AS(grad_i(data, {LossKind::ridge, 0.1}, Eigen::VectorXd::Zero(5), 0), InvalidInput);
  data.normalized = true;
  CHECK_THROWS_AS(data.validate(), InvalidInput);
  CHECK(parse_loss_kind("logistic") == LossKind::logistic);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), InvalidInput);
}
