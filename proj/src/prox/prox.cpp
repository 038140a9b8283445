#include "airi/prox/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airi/errors.hpp"

namespace airi::prox {

double soft_threshold(double c, double threshold) {
  if (!(threshold >= 0.0)) throw ValidationError("soft threshold must be nonnegative");
  const double mag = std::abs(c) - threshold;
  return mag > 0.0 ? std::copysign(mag, c) : 0.0;
}

std::vector<double> soft_threshold(std::span<const double> c, std::span<const double> thresholds) {
  if (c.size() != thresholds.size()) {
    throw ValidationError("soft_threshold: " + std::to_string(c.size()) + " coefficients but " +
                          std::to_string(thresholds.size()) + " thresholds");
  }
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) out[j] = soft_threshold(c[j], thresholds[j]);
  return out;
}

Image project_positive(const Image& x) {
  Image out = x;
  project_positive_inplace(out);
  return out;
}

void project_positive_inplace(Image& x) {
  for (double& v : x.values()) v = std::max(v, 0.0);
}

ProxResult prox_weighted_l1(const sara::Dictionary& psi, const Image& z, double step_reg,
                            const WeightMatrix& weights, DualState& dual,
                            const DualProxOptions& options) {
  const std::size_t n = psi.pixel_count();
  const std::size_t m = psi.coefficient_count();
  if (z.rows() != psi.rows() || z.cols() != psi.cols()) {
    throw ValidationError("prox: image shape does not match the dictionary");
  }
  if (!(step_reg >= 0.0) || !std::isfinite(step_reg)) {
    throw ValidationError("prox: regularization step must be finite and nonnegative");
  }
  if (!(options.xi2 > 0.0)) throw ValidationError("prox: xi2 must be positive");
  if (options.max_iter < 1) throw ValidationError("prox: max_iter must be >= 1");
  if (weights.size() != m) {
    throw ValidationError("prox: weight vector has " + std::to_string(weights.size()) +
                          " entries, expected " + std::to_string(m));
  }
  if (dual.empty()) dual.v.assign(m, 0.0);
  if (dual.v.size() != m) throw ValidationError("prox: dual state has the wrong length");

  std::vector<double> thresholds(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(weights.diag[j] >= 0.0)) throw ValidationError("prox: weights must be nonnegative");
    thresholds[j] = step_reg * weights.diag[j];
  }

  ProxResult result;
  Image x(z.rows(), z.cols());
  Image prev;
  std::vector<double> back(n);
  std::vector<double> coeffs(m);
  for (int l = 0; l < options.max_iter; ++l) {
    psi.synthesis(dual.v, back);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::max(z[i] - back[i], 0.0);
    psi.analysis(x.pixels(), coeffs);
    // (I - soft) is a clip to the threshold box.
    for (std::size_t j = 0; j < m; ++j) {
      const double w = dual.v[j] + coeffs[j];
      dual.v[j] = std::clamp(w, -thresholds[j], thresholds[j]);
    }
    result.iterations = l + 1;
    if (l > 0 && relative_change(x, prev) < options.xi2) {
      result.converged = true;
      break;
    }
    prev = x;
  }
  if (!x.all_finite()) throw NumericalError("prox: non-finite iterate");
  result.image = std::move(x);
  return result;
}

WeightMatrix update_weights(const sara::Dictionary& psi, const Image& x, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("reweighting: rho must be > 0");
  std::vector<double> coeffs(psi.coefficient_count());
  psi.analysis(x.pixels(), coeffs);
  WeightMatrix w;
  w.diag.resize(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) w.diag[j] = rho / (rho + std::abs(coeffs[j]));
  return w;
}

double weighted_l1(const sara::Dictionary& psi, const Image& x, const WeightMatrix& weights) {
  std::vector<double> coeffs(psi.coefficient_count());
  psi.analysis(x.pixels(), coeffs);
  if (weights.size() != coeffs.size()) throw ValidationError("weighted_l1: weight length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) acc += weights.diag[j] * std::abs(coeffs[j]);
  return acc;
}

double log_sum_prior(const sara::Dictionary& psi, const Image& x, double rho) {
  if (!(rho > 0.0)) throw ValidationError("log-sum prior: rho must be > 0");
  std::vector<double> coeffs(psi.coefficient_count());
  psi.analysis(x.pixels(), coeffs);
  double acc = 0.0;
  for (double c : coeffs) acc += std::log1p(std::abs(c) / rho);
  return rho * acc;
}

}  // namespace airi::prox
