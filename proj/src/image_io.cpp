#include "airi/image_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "airi/errors.hpp"

namespace airi {

static_assert(std::endian::native == std::endian::little,
              "image I/O assumes a little-endian host");

void save_image(const Image& img, const std::filesystem::path& path) {
  nlohmann::json header = {{"rows", img.rows()},
                           {"cols", img.cols()},
                           {"channels", 1},
                           {"dtype", "float64"},
                           {"endianness", "little"}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out.write(kImageMagic.data(), static_cast<std::streamsize>(kImageMagic.size()));
  const auto length = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(img.values().data()),
            static_cast<std::streamsize>(img.size() * sizeof(double)));
  if (!out) throw ValidationError("failed writing " + path.string());
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image " + path.string());
  char magic[16];
  in.read(magic, sizeof(magic));
  if (!in || std::string_view(magic, sizeof(magic)) != kImageMagic) {
    throw ValidationError(path.string() + ": bad image magic");
  }
  std::uint32_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || length > (1u << 20)) throw ValidationError(path.string() + ": bad header length");
  std::string text(length, '\0');
  in.read(text.data(), length);
  if (!in) throw ValidationError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed header: " + e.what());
  }
  if (header.value("dtype", "") != "float64" || header.value("endianness", "") != "little") {
    throw ValidationError(path.string() + ": only little-endian float64 payloads are supported");
  }
  const auto rows = header.at("rows").get<std::size_t>();
  const auto cols = header.at("cols").get<std::size_t>();
  const auto channels = header.value("channels", std::size_t{1});
  if (channels == 0) throw ValidationError(path.string() + ": zero channels");

  std::vector<double> payload(rows * cols * channels);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!in) throw ValidationError(path.string() + ": truncated payload");

  std::vector<double> pixels(rows * cols, 0.0);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t i = 0; i < rows * cols; ++i) pixels[i] += payload[ch * rows * cols + i];
  }
  if (channels > 1) {
    for (double& v : pixels) v /= static_cast<double>(channels);
  }
  return Image(rows, cols, std::move(pixels));
}

}  // namespace airi
