#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "airi/denoiser/cnn.hpp"

namespace airi::denoiser {

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kWeightsFile = "weights.bin";

/// Weights plus manifest metadata as stored on disk. Keys this engine does not interpret
/// (timestamps, trainer settings) are kept in `extra` and written back unchanged.
struct ModelFile {
  int version = kManifestVersion;
  std::vector<ConvLayer> layers;
  ModelInfo info;
  nlohmann::json extra = nlohmann::json::object();

  std::size_t width() const { return layers.empty() ? 0 : layers.front().out; }
};

/// Number of bytes of the float32 weight blob implied by the layer shapes.
std::size_t weight_bytes(const std::vector<ConvLayer>& layers);

std::string sha256_hex(const std::vector<unsigned char>& bytes);

/// Accepts either the model directory or the manifest path. Weights are read from
/// `weights.bin` next to the manifest. Throws ValidationError on any mismatch.
ModelFile load_model(const std::filesystem::path& manifest_or_dir);

/// Writes manifest.json and weights.bin into `dir` (created if missing). Weights are
/// rounded to float32; returns the manifest path.
std::filesystem::path save_model(const ModelFile& model, const std::filesystem::path& dir);

std::shared_ptr<CnnDenoiser> make_denoiser(const ModelFile& model);

/// Forward-pass vectors shared with the trainer: {rows, cols, inputs, outputs}, each input
/// and output a row-major float64 list.
struct ReferenceVectors {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Image> inputs;
  std::vector<Image> outputs;
};

ReferenceVectors make_reference_vectors(const Denoiser& d, const std::vector<Image>& inputs);
void save_reference_vectors(const ReferenceVectors& ref, const std::filesystem::path& path);
ReferenceVectors load_reference_vectors(const std::filesystem::path& path);

/// Largest absolute deviation between d(input) and the stored output over all vectors.
double reference_max_error(const Denoiser& d, const ReferenceVectors& ref);

}  // namespace airi::denoiser
