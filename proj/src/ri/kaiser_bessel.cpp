#include "airi/ri/kaiser_bessel.hpp"

#include <cmath>
#include <numbers>

#include "airi/errors.hpp"

namespace airi::ri {

double bessel_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

KaiserBessel::KaiserBessel(int support, double beta) : support_(support), beta_(beta) {
  if (support < 2) throw ValidationError("kernel support must be >= 2");
  if (!(beta > 0.0)) throw ValidationError("kernel shape parameter must be positive");
}

double KaiserBessel::default_beta(int support, double oversampling) {
  const double ratio = static_cast<double>(support) / oversampling;
  const double arg = ratio * ratio * (oversampling - 0.5) * (oversampling - 0.5) - 0.8;
  return std::numbers::pi * std::sqrt(std::max(arg, 1e-3));
}

double KaiserBessel::operator()(double s) const {
  const double half = 0.5 * support_;
  if (std::abs(s) > half) return 0.0;
  const double r = s / half;
  return bessel_i0(beta_ * std::sqrt(std::max(0.0, 1.0 - r * r)));
}

double KaiserBessel::transform(double xi) const {
  const double w = std::numbers::pi * support_ * xi;
  const double z2 = beta_ * beta_ - w * w;
  if (z2 > 0.0) {
    const double z = std::sqrt(z2);
    return support_ * std::sinh(z) / z;
  }
  if (z2 < 0.0) {
    const double z = std::sqrt(-z2);
    return support_ * std::sin(z) / z;
  }
  return support_;
}

}  // namespace airi::ri
