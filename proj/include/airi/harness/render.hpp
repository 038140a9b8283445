#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "airi/image.hpp"

namespace airi::harness {

/// Grey levels for an image shown in logarithmic scale: rlog(min(max(x, 0), saturation))
/// scaled so that `saturation` maps to 255.
std::vector<std::uint8_t> rlog_levels(const Image& x, double saturation = 1e-1);

/// Grey levels for a signed image on a symmetric linear scale [-limit, limit]; limit 0 uses
/// the largest magnitude.
std::vector<std::uint8_t> symmetric_levels(const Image& x, double limit = 0.0);

/// 8-bit greyscale PNG, row-major.
void write_png(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
               const std::vector<std::uint8_t>& levels);

}  // namespace airi::harness
