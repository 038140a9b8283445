#include "airi/harness/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "airi/errors.hpp"
#include "airi/harness/metrics.hpp"

namespace airi::harness {

std::vector<std::uint8_t> rlog_levels(const Image& x, double saturation) {
  if (!(saturation > 0.0)) throw ValidationError("display saturation must be positive");
  const double top = rlog(saturation);
  std::vector<std::uint8_t> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double v = std::isfinite(x[j]) ? std::clamp(x[j], 0.0, saturation) : 0.0;
    out[j] = static_cast<std::uint8_t>(std::lround(255.0 * rlog(v) / top));
  }
  return out;
}

std::vector<std::uint8_t> symmetric_levels(const Image& x, double limit) {
  if (limit <= 0.0) {
    for (double v : x.values()) {
      if (std::isfinite(v)) limit = std::max(limit, std::abs(v));
    }
  }
  std::vector<std::uint8_t> out(x.size(), 128);
  if (limit <= 0.0) return out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double v = std::isfinite(x[j]) ? std::clamp(x[j] / limit, -1.0, 1.0) : 0.0;
    out[j] = static_cast<std::uint8_t>(std::lround(127.5 * (v + 1.0)));
  }
  return out;
}

void write_png(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
               const std::vector<std::uint8_t>& levels) {
  if (levels.size() != rows * cols || rows == 0 || cols == 0) {
    throw ValidationError("PNG pixel buffer does not match its dimensions");
  }
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!file) throw ValidationError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw NumericalError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ValidationError("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r) {
    png_write_row(png, levels.data() + r * cols);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace airi::harness
