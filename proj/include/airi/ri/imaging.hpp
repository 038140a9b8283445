#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "airi/image.hpp"
#include "airi/ri/measurement.hpp"

namespace airi::ri {

/// beta = 1 / max_i (Re{Phi^dagger Phi} delta)_i with delta the phase-centre impulse.
/// Throws NumericalError when the beam peak is not positive (degenerate coverage).
double beam_normalization(const LinearMeasurement& op);

/// Point spread function normalized to a peak of exactly 1.
Image dirty_beam(const LinearMeasurement& op);

/// beta * Re{Phi^dagger y}
Image dirty_image(const LinearMeasurement& op, std::span<const std::complex<double>> y);

struct SpectralNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power method on Re{Phi^dagger Phi} from a seeded random start. Stops when successive
/// Rayleigh quotients differ relatively by less than tol. Caches the estimate in op.
SpectralNormResult spectral_norm(LinearMeasurement& op, double tol = 1e-6, int max_iter = 1000,
                                 std::uint64_t seed = 0);

/// How the input SNR fixes the per-visibility noise level tau.
enum class NoiseConvention {
  /// tau = ||Phi x|| / sqrt(m) * 10^(-iSNR/20): signal RMS per visibility over tau.
  kPerVisibility,
  /// tau = ||Phi x|| * 10^(-iSNR/20): whole-vector norm over tau.
  kTotalNorm,
};

double noise_level(double signal_norm, std::size_t count, double isnr_db,
                   NoiseConvention convention);

/// y = Phi x + e with complex Gaussian e of total variance tau^2 (tau^2/2 per
/// component). isnr_db = +inf produces noiseless data with tau = 0.
VisibilitySet simulate_visibilities(const LinearMeasurement& op, const Image& groundtruth,
                                    double isnr_db, std::uint64_t seed,
                                    NoiseConvention convention = NoiseConvention::kPerVisibility);

}  // namespace airi::ri
