#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "airi/denoiser/denoiser.hpp"

namespace airi::denoiser {

struct JacobianNorm {
  double value = 0.0;
  int iterations = 0;
  /// Some relu sat exactly at zero; its derivative was taken as 0.
  bool kink = false;
};

/// Power-method estimate of the spectral norm of the Jacobian of 2D - I at x. Each step
/// applies J then J^T, and the estimate ||J v|| / ||v|| never decreases with `iters`.
JacobianNorm jacobian_spectral_norm(const DifferentiableDenoiser& d, const Image& x, int iters,
                                    std::uint64_t seed);

struct CertifyOptions {
  int power_iters = 50;
  /// Evaluation points per (noisy, clean) pair.
  int points_per_pair = 1;
  double margin = 5e-2;
  std::uint64_t seed = 0;
};

struct CertificationReport {
  std::vector<double> norms;
  double max = 0.0;
  double mean = 0.0;
  std::size_t kinks = 0;
  double margin = 0.0;
  bool passed = false;
};

/// Evaluates the Jacobian norm at points drawn uniformly on the segments between each noisy
/// input and its clean target. Passes when every value is at most 1 + margin.
CertificationReport certify(const DifferentiableDenoiser& d,
                            const std::vector<std::pair<Image, Image>>& pairs,
                            const CertifyOptions& options = {});

}  // namespace airi::denoiser
