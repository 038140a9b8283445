#pragma once

#include <array>
#include <cstddef>

#include "airi/denoiser/model_io.hpp"

namespace airi::denoiser {

using Kernel3 = std::array<double, 9>;

/// Dirac kernel: correlation with it is the identity.
Kernel3 dirac_kernel();
/// Normalized 3x3 binomial blur [1 2 1]^T [1 2 1] / 16.
Kernel3 binomial_kernel();

/// Valid 20-layer model whose stack computes R(x) = k * x exactly for a 3x3 kernel k:
/// the first layer splits x into the relu pair (k*x, -k*x), the hidden layers copy both
/// channels, and the last layer takes their difference. Extra channels stay zero.
/// Requires width >= 2.
ModelFile linear_residual_model(const Kernel3& kernel, std::size_t width = 2, ModelInfo info = {});

/// All weights and biases zero, so D(x) = relu(x) with the residual skip.
ModelFile zero_model(std::size_t width = 2, ModelInfo info = {});

/// D(x) = relu((1 - strength) x + strength * blur(x)). Firmly nonexpansive up to the relu
/// mask for strength in (0, 1].
ModelFile smoothing_model(double strength = 0.5, std::size_t width = 2, ModelInfo info = {});

/// D(x) = relu(gain * x). gain > 1 makes the Jacobian of 2D - I expansive.
ModelFile gain_model(double gain, std::size_t width = 2, ModelInfo info = {});

}  // namespace airi::denoiser
