#pragma once

#include <cstdint>

#include "airi/image.hpp"

namespace airi::harness {

/// Seeded radio-galaxy-like test image with unit peak: a compact core, two jets ending in
/// extended lobes, faint diffuse emission and scattered faint compact sources, floored at
/// 1 / dynamic_range.
Image synthetic_sky(std::size_t rows, std::size_t cols, std::uint64_t seed,
                    double dynamic_range = 1e4);

}  // namespace airi::harness
