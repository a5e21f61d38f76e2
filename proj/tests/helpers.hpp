#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "sagd/problem.hpp"
#include "sagd/rng.hpp"

namespace testing {

inline sagd::Dataset dataset_from(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  sagd::Dataset data;
  data.rows = a.sparseView(0.0, 0.0);
  data.labels = y;
  return data;
}

inline Eigen::MatrixXd random_matrix(sagd::SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_vector(sagd::SeededRng& rng, Eigen::Index size) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = rng.normal();
  return v;
}

inline sagd::Dataset random_ridge(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  sagd::SeededRng rng(seed);
  const Eigen::MatrixXd a = random_matrix(rng, n, d);
  const Eigen::VectorXd y = random_vector(rng, n);
  return dataset_from(a, y);
}

inline sagd::Dataset random_logistic(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  sagd::Dataset data = random_ridge(n, d, seed);
  for (Eigen::Index i = 0; i < n; ++i) data.labels(i) = data.labels(i) >= 0.0 ? 1.0 : -1.0;
  return data;
}

}  // namespace testing
