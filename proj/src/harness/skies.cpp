#include "airi/harness/skies.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "airi/errors.hpp"

namespace airi::harness {
namespace {

/// Adds an elliptical gaussian, evaluated only within 5 widths of its centre.
void add_gaussian(Image& x, double r0, double c0, double amp, double major, double minor,
                  double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double reach = 5.0 * std::max(major, minor);
  const auto lo_r = static_cast<long>(std::max(0.0, std::floor(r0 - reach)));
  const auto hi_r = static_cast<long>(std::min(static_cast<double>(x.rows()) - 1, std::ceil(r0 + reach)));
  const auto lo_c = static_cast<long>(std::max(0.0, std::floor(c0 - reach)));
  const auto hi_c = static_cast<long>(std::min(static_cast<double>(x.cols()) - 1, std::ceil(c0 + reach)));
  for (long r = lo_r; r <= hi_r; ++r) {
    for (long c = lo_c; c <= hi_c; ++c) {
      const double dr = r - r0, dc = c - c0;
      const double along = ca * dc + sa * dr;
      const double across = -sa * dc + ca * dr;
      x(r, c) += amp * std::exp(-0.5 * (along * along / (major * major) + across * across / (minor * minor)));
    }
  }
}

}  // namespace

Image synthetic_sky(std::size_t rows, std::size_t cols, std::uint64_t seed, double dynamic_range) {
  if (rows < 8 || cols < 8) throw ValidationError("synthetic sky needs at least 8x8 pixels");
  if (!(dynamic_range > 1.0)) throw ValidationError("dynamic range must exceed 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double n = static_cast<double>(std::min(rows, cols));
  const double r0 = 0.5 * rows + (unit(rng) - 0.5) * 0.1 * n;
  const double c0 = 0.5 * cols + (unit(rng) - 0.5) * 0.1 * n;
  const double axis = std::numbers::pi * unit(rng);

  Image x(rows, cols);
  add_gaussian(x, r0, c0, 1.0, 0.004 * n + 0.6, 0.004 * n + 0.6, 0.0);
  for (int side : {-1, 1}) {
    const double length = n * (0.18 + 0.12 * unit(rng));
    const double bend = (unit(rng) - 0.5) * 0.4;
    const double dir = axis + (side < 0 ? std::numbers::pi : 0.0);
    // Jet: knots fading along a slightly bent path.
    const int knots = 12;
    for (int k = 1; k <= knots; ++k) {
      const double t = static_cast<double>(k) / knots;
      const double ang = dir + bend * t;
      add_gaussian(x, r0 + t * length * std::sin(ang), c0 + t * length * std::cos(ang),
                   0.08 * std::pow(0.8, k) + 0.01, 0.01 * n, 0.004 * n + 0.5, ang);
    }
    // Lobe: a bright head inside a broad diffuse envelope.
    const double ang = dir + bend;
    const double lr = r0 + length * std::sin(ang), lc = c0 + length * std::cos(ang);
    add_gaussian(x, lr, lc, 0.15 + 0.15 * unit(rng), 0.02 * n, 0.012 * n, ang + 0.5 * std::numbers::pi);
    add_gaussian(x, lr - 0.03 * n * std::sin(ang), lc - 0.03 * n * std::cos(ang), 0.03,
                 0.09 * n, 0.05 * n, ang + (unit(rng) - 0.5));
    for (int k = 0; k < 6; ++k) {
      add_gaussian(x, lr + (unit(rng) - 0.5) * 0.12 * n, lc + (unit(rng) - 0.5) * 0.12 * n,
                   0.02 + 0.04 * unit(rng), 0.01 * n + 0.03 * n * unit(rng), 0.008 * n + 0.01 * n * unit(rng),
                   std::numbers::pi * unit(rng));
    }
  }
  // Faint diffuse emission and background compact sources.
  for (int k = 0; k < 4; ++k) {
    add_gaussian(x, rows * unit(rng), cols * unit(rng), 2e-3 * (1 + unit(rng)), 0.08 * n * (1 + unit(rng)),
                 0.06 * n * (1 + unit(rng)), std::numbers::pi * unit(rng));
  }
  for (int k = 0; k < 25; ++k) {
    add_gaussian(x, rows * unit(rng), cols * unit(rng), std::pow(10.0, -3.5 + 2.0 * unit(rng)),
                 0.6 + 0.003 * n * unit(rng), 0.6 + 0.003 * n * unit(rng), 0.0);
  }

  const double peak = x.max();
  const double floor = 1.0 / dynamic_range;
  for (double& v : x.values()) {
    v /= peak;
    if (v < floor) v = 0.0;
  }
  return x;
}

}  // namespace airi::harness
