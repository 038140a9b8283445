#pragma once

#include <span>

namespace airi::sara {

/// Orthonormal minimal-phase Daubechies scaling filter dbN (2N taps, sum sqrt(2)).
/// Valid orders are 1..8.
std::span<const double> daubechies_filter(int order);

}  // namespace airi::sara
