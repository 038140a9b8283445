#pragma once

#include <complex>
#include <span>

#include "airi/image.hpp"
#include "airi/ri/measurement.hpp"

namespace airi::harness {

/// Scale factor of the logarithmic display and metric mapping.
inline constexpr double kRlogScale = 1e3;

/// x -> log10(a x + 1) / log10(a) with a = 1e3.
double rlog(double x);
Image rlog(const Image& x);

/// 20 log10(||truth|| / ||truth - estimate||) in dB; +infinity when the two are equal.
/// Throws ValidationError when truth is zero or shapes differ.
double snr(const Image& estimate, const Image& truth);
/// snr(rlog(estimate), rlog(truth))
double logsnr(const Image& estimate, const Image& truth);

/// beta Re{Phi^dagger (y - Phi x)} with beta the dirty-beam normalization.
Image residual_image(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                     const Image& estimate);

}  // namespace airi::harness
