#include "airi/ri/imaging.hpp"

#include <cmath>
#include <random>

#include "airi/errors.hpp"

namespace airi::ri {

double beam_normalization(const LinearMeasurement& op) {
  const Image psf = op.normal(centre_impulse(op.image_rows(), op.image_cols()));
  const double peak = psf.max();
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw NumericalError("degenerate coverage: point spread function has no positive peak");
  }
  return 1.0 / peak;
}

Image dirty_beam(const LinearMeasurement& op) {
  Image psf = op.normal(centre_impulse(op.image_rows(), op.image_cols()));
  const double peak = psf.max();
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw NumericalError("degenerate coverage: point spread function has no positive peak");
  }
  for (double& v : psf.pixels()) v /= peak;
  return psf;
}

Image dirty_image(const LinearMeasurement& op, std::span<const std::complex<double>> y) {
  const double peak = 1.0 / beam_normalization(op);
  Image dirty = op.adjoint(y);
  for (double& v : dirty.pixels()) v /= peak;
  return dirty;
}

SpectralNormResult spectral_norm(LinearMeasurement& op, double tol, int max_iter,
                                 std::uint64_t seed) {
  if (!(tol > 0.0)) throw ValidationError("spectral_norm: tol must be positive");
  if (max_iter < 1) throw ValidationError("spectral_norm: max_iter must be >= 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Image x(op.image_rows(), op.image_cols());
  for (double& v : x.pixels()) v = gauss(rng);
  x = (1.0 / norm(x)) * x;

  SpectralNormResult result;
  double previous = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    Image ax = op.normal(x);
    const double rayleigh = dot(x, ax);
    const double len = norm(ax);
    result.value = rayleigh;
    result.iterations = k;
    if (len == 0.0) {
      result.value = 0.0;
      result.converged = true;
      break;
    }
    if (k > 1 && std::abs(rayleigh - previous) < tol * std::abs(rayleigh)) {
      result.converged = true;
      break;
    }
    previous = rayleigh;
    x = (1.0 / len) * ax;
  }
  op.set_lipschitz(result.value);
  return result;
}

double noise_level(double signal_norm, std::size_t count, double isnr_db,
                   NoiseConvention convention) {
  if (std::isinf(isnr_db) && isnr_db > 0) return 0.0;
  const double scale = std::pow(10.0, -isnr_db / 20.0);
  switch (convention) {
    case NoiseConvention::kTotalNorm:
      return signal_norm * scale;
    case NoiseConvention::kPerVisibility:
      return signal_norm / std::sqrt(static_cast<double>(count)) * scale;
  }
  return 0.0;
}

VisibilitySet simulate_visibilities(const LinearMeasurement& op, const Image& groundtruth,
                                    double isnr_db, std::uint64_t seed,
                                    NoiseConvention convention) {
  if (std::isnan(isnr_db) || (std::isinf(isnr_db) && isnr_db < 0)) {
    throw ValidationError("isnr_db must be finite or +inf");
  }
  VisibilitySet out;
  out.values = op.forward(groundtruth);
  double energy = 0.0;
  for (const auto& v : out.values) energy += std::norm(v);
  const double signal = std::sqrt(energy);
  if (signal == 0.0) throw ValidationError("zero groundtruth signal: noise level undefined");

  out.tau = noise_level(signal, out.values.size(), isnr_db, convention);
  if (out.tau > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, out.tau / std::sqrt(2.0));
    for (auto& v : out.values) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v += std::complex<double>(re, im);
    }
  }
  return out;
}

}  // namespace airi::ri
