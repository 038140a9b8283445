#pragma once

// Independent reference implementations used only by the test suites.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "airi/image.hpp"
#include "airi/ri/measurement.hpp"
#include "airi/ri/uv_coverage.hpp"

namespace oracle {

airi::Image random_image(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                         double lo = -1.0, double hi = 1.0);
airi::ri::Visibilities random_visibilities(std::size_t m, std::mt19937_64& rng);
std::vector<airi::ri::UVPoint> random_normalized_points(std::size_t m, std::mt19937_64& rng);

/// Direct DFT at arbitrary frequencies: A(i, r*cols+c) = exp(-i (wu (c-N2/2) + wv (r-N1/2))).
Eigen::MatrixXcd dense_dft(const airi::ri::UVCoverage& cov, std::size_t rows, std::size_t cols);

Eigen::VectorXd to_vector(const airi::Image& img);
airi::Image to_image(const Eigen::VectorXd& v, std::size_t rows, std::size_t cols);
Eigen::VectorXcd to_vector(const airi::ri::Visibilities& y);

/// Relative l2 error ||a - b|| / ||b||.
double rel_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);
double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Explicit matrix of a linear image-to-image map, built column by column.
template <typename F>
Eigen::MatrixXd materialize(std::size_t rows, std::size_t cols, F&& apply) {
  const auto n = static_cast<Eigen::Index>(rows * cols);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    airi::Image e(rows, cols);
    e[static_cast<std::size_t>(j)] = 1.0;
    m.col(j) = to_vector(apply(e));
  }
  return m;
}

/// Certified solution of min_{u >= 0} 1/2||z - u||^2 + sum_j t_j |(A u)_j| for a dense A with
/// ||A|| <= 1. Runs a primal-dual (Chambolle-Pock) iteration; `gap` bounds ||u - u*||^2 / 2.
struct ProxOracleResult {
  Eigen::VectorXd u;
  Eigen::VectorXd dual;
  double gap = 0.0;
  int iterations = 0;
};
ProxOracleResult weighted_l1_prox(const Eigen::MatrixXd& analysis, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& thresholds, double gap_tol = 1e-13,
                                  int max_iter = 400000);

}  // namespace oracle
