#pragma once

#include <filesystem>
#include <string_view>

#include "airi/image.hpp"

namespace airi {

/// Binary image container:
///   bytes 0..15   magic "AIRI_IMAGE_V0001"
///   bytes 16..19  little-endian uint32 length of the JSON header
///   JSON header   {"rows", "cols", "channels", "dtype": "float64", "endianness": "little"}
///   payload       float64 little-endian, channel-major then row-major
inline constexpr std::string_view kImageMagic = "AIRI_IMAGE_V0001";

void save_image(const Image& img, const std::filesystem::path& path);

/// Loads a single-channel image; multi-channel files are averaged over channels.
Image load_image(const std::filesystem::path& path);

}  // namespace airi
