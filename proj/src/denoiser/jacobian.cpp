#include "airi/denoiser/jacobian.hpp"

#include <algorithm>
#include <random>

#include "airi/errors.hpp"

namespace airi::denoiser {
namespace {

/// (2J - I) v
Image reflected_jvp(const DifferentiableDenoiser& d, const Image& x, const Image& v) {
  Image w = d.jvp(x, v);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = 2.0 * w[j] - v[j];
  return w;
}

Image reflected_vjp(const DifferentiableDenoiser& d, const Image& x, const Image& w) {
  Image u = d.vjp(x, w);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = 2.0 * u[j] - w[j];
  return u;
}

}  // namespace

JacobianNorm jacobian_spectral_norm(const DifferentiableDenoiser& d, const Image& x, int iters,
                                    std::uint64_t seed) {
  if (iters < 1) throw ValidationError("power iteration count must be at least 1");
  if (x.empty()) throw ValidationError("jacobian norm of an empty image");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Image v(x.rows(), x.cols());
  for (double& p : v.values()) p = gauss(rng);

  JacobianNorm result;
  result.kink = d.touched_kink(x);
  for (int k = 0; k < iters; ++k) {
    const double nv = norm(v);
    if (nv == 0.0) break;
    const Image w = reflected_jvp(d, x, v);
    const double nw = norm(w);
    result.value = std::max(result.value, nw / nv);
    result.iterations = k + 1;
    if (nw == 0.0) break;
    Image u = reflected_vjp(d, x, w);
    const double nu = norm(u);
    if (nu == 0.0) break;
    v = (1.0 / nu) * u;
  }
  return result;
}

CertificationReport certify(const DifferentiableDenoiser& d,
                            const std::vector<std::pair<Image, Image>>& pairs,
                            const CertifyOptions& options) {
  if (pairs.empty()) throw ValidationError("certification needs at least one pair");
  if (options.points_per_pair < 1) throw ValidationError("points_per_pair must be at least 1");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CertificationReport report;
  report.margin = options.margin;
  for (const auto& [noisy, clean] : pairs) {
    require_same_shape(noisy, clean, "certification pair");
    for (int p = 0; p < options.points_per_pair; ++p) {
      const double t = unit(rng);
      Image point = noisy;
      for (std::size_t j = 0; j < point.size(); ++j) point[j] += t * (clean[j] - noisy[j]);
      const JacobianNorm jn = jacobian_spectral_norm(d, point, options.power_iters, rng());
      report.norms.push_back(jn.value);
      if (jn.kink) ++report.kinks;
    }
  }
  double sum = 0.0;
  for (double n : report.norms) {
    report.max = std::max(report.max, n);
    sum += n;
  }
  report.mean = sum / static_cast<double>(report.norms.size());
  report.passed = report.max <= 1.0 + options.margin;
  return report;
}

}  // namespace airi::denoiser
