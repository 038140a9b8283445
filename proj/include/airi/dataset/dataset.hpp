#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "airi/image.hpp"
#include "airi/solvers/solvers.hpp"

namespace airi::dataset {

/// Nominal floor level of the low-dynamic-range optical images.
inline constexpr double kDefaultFloor = 1.0 / 64.0;
inline constexpr std::size_t kDefaultTile = 512;
inline constexpr std::size_t kDefaultPatch = 46;

/// Intensities in [0, 1] with unit or lower peak, plus the nominal floor level.
struct LowDRImage {
  Image pixels;
  double floor = kDefaultFloor;
};

/// Throws ValidationError unless all pixels lie in [0, 1].
void require_low_dynamic_range(const Image& x, const std::string& what);

/// Divides by the maximum and clips negatives so the peak is exactly 1. Colour inputs are
/// expected to be averaged to one channel before this.
Image normalize_peak(const Image& raw);

/// Noise level estimate from signal-free regions. With `box` (row, col, height, width) the
/// sample standard deviation over the box is returned. Otherwise the image is cut into
/// `block` x `block` cells and a median-absolute-deviation estimate is taken over diagonal
/// pixel differences in the darkest tenth of the cells.
struct Box {
  std::size_t row = 0, col = 0, height = 0, width = 0;
};
double estimate_background_sigma(const Image& x, std::optional<Box> box = std::nullopt,
                                 std::size_t block = 16);

struct PreprocessOptions {
  double xi1 = 6e-6;
  double xi2 = 1e-4;
  int max_iterations = 6000;
  int prox_max_iter = 200;
  int dict_depth = 4;
};

/// Denoises a raw image with uSARA under identity measurements, regularization and floor both
/// set to sigma_hat, unit step and one FB step per reweighting. Images whose sides are not
/// multiples of 2^depth are mirror-padded for the solve and cropped back.
struct PreprocessResult {
  LowDRImage image;
  solvers::SolverReport report;
};
PreprocessResult preprocess_raw(const LowDRImage& raw, double sigma_hat,
                                const PreprocessOptions& options = {});

/// Mirror (edge-repeating) padding on the bottom and right up to the given size.
Image symmetric_pad(const Image& x, std::size_t rows, std::size_t cols);

/// Pads to the next multiples of `tile` and cuts row by row into tile x tile images.
std::vector<LowDRImage> split_tiles(const LowDRImage& img, std::size_t tile = kDefaultTile);

/// Largest root a of a = (1 + a sigma)^(1 / floor): the exponentiation parameter whose nominal
/// dynamic range a / (a^floor - 1) equals 1 / sigma.
double solve_exponentiation(double sigma, double floor = kDefaultFloor);

/// Pixel-wise (a^u - 1) / a.
Image exponentiate(const Image& low, double a);
double exponentiate(double u, double a);

struct TrainingPair {
  Image groundtruth;
  Image noisy;
  double sigma = 0.0;
  double a = 0.0;
  std::uint64_t seed = 0;
};

/// groundtruth = exponentiate(low, a); noisy = groundtruth + sigma * w with w standard normal
/// drawn from mt19937_64(seed).
TrainingPair make_pair(const Image& low, double a, double sigma, std::uint64_t seed);

struct PatchOptions {
  std::size_t size = kDefaultPatch;
  std::size_t count = 0;
  bool augment = false;
  double min_zoom = 0.75;
  double max_zoom = 1.25;
  std::uint64_t seed = 0;
};

/// Random square crops. With augmentation each crop is resampled bilinearly at a random zoom
/// and passed through a random flip/quarter-turn.
std::vector<Image> extract_patches(const Image& img, const PatchOptions& options);

/// Corpus directory: raw/*.img, low/*.img and manifest.csv listing each image with its
/// background noise estimate and source credit.
struct CorpusEntry {
  std::string filename;
  double sigma_hat = 0.0;
  std::string credit;
};

inline constexpr const char* kCorpusManifest = "manifest.csv";

void write_corpus_manifest(const std::filesystem::path& corpus_dir,
                           const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> read_corpus_manifest(const std::filesystem::path& corpus_dir);

/// Preprocesses every raw/*.img into low/*.img. Noise levels come from an existing manifest
/// entry when present, otherwise from estimate_background_sigma. Rewrites the manifest.
std::vector<CorpusEntry> build_corpus(const std::filesystem::path& corpus_dir,
                                      const PreprocessOptions& options = {});

}  // namespace airi::dataset
