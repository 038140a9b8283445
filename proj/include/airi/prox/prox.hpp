#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "airi/image.hpp"
#include "airi/sara/dictionary.hpp"

namespace airi::prox {

/// Diagonal of the weighting matrix in coefficient space.
struct WeightMatrix {
  std::vector<double> diag;

  static WeightMatrix identity(std::size_t count) { return {std::vector<double>(count, 1.0)}; }
  std::size_t size() const { return diag.size(); }
};

/// Dual variable of the weighted-l1 prox, kept between calls for warm starts.
struct DualState {
  std::vector<double> v;

  bool empty() const { return v.empty(); }
};

std::vector<double> soft_threshold(std::span<const double> c, std::span<const double> thresholds);
double soft_threshold(double c, double threshold);

Image project_positive(const Image& x);
void project_positive_inplace(Image& x);

struct DualProxOptions {
  double xi2 = 1e-5;
  int max_iter = 200;
};

struct ProxResult {
  Image image;
  int iterations = 0;
  bool converged = false;
};

/// argmin_u 1/2||z - u||^2 + step_reg ||W psi^T u||_1 + positivity, by dual forward-backward
/// with unit dual step. An empty `dual` is cold-started at zero and is overwritten on return.
ProxResult prox_weighted_l1(const sara::Dictionary& psi, const Image& z, double step_reg,
                            const WeightMatrix& weights, DualState& dual,
                            const DualProxOptions& options = {});

/// W_jj = rho / (rho + |(psi^T x)_j|)
WeightMatrix update_weights(const sara::Dictionary& psi, const Image& x, double rho);

/// sum_j W_jj |(psi^T x)_j|
double weighted_l1(const sara::Dictionary& psi, const Image& x, const WeightMatrix& weights);

/// rho * sum_j log(|(psi^T x)_j| / rho + 1), the log-sum prior handled by reweighting.
double log_sum_prior(const sara::Dictionary& psi, const Image& x, double rho);

}  // namespace airi::prox
