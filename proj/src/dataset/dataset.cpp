#include "airi/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "airi/denoiser/denoiser.hpp"
#include "airi/errors.hpp"
#include "airi/image_io.hpp"
#include "airi/ri/measurement.hpp"

namespace airi::dataset {
namespace {

namespace fs = std::filesystem;

std::size_t mirror_index(std::size_t i, std::size_t n) {
  const std::size_t m = i % (2 * n);
  return m < n ? m : 2 * n - 1 - m;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Image crop(const Image& x, std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) {
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = x(r0 + r, c0 + c);
  }
  return out;
}

double bilinear(const Image& x, double r, double c) {
  r = std::clamp(r, 0.0, static_cast<double>(x.rows() - 1));
  c = std::clamp(c, 0.0, static_cast<double>(x.cols() - 1));
  const auto r0 = static_cast<std::size_t>(r);
  const auto c0 = static_cast<std::size_t>(c);
  const std::size_t r1 = std::min(r0 + 1, x.rows() - 1);
  const std::size_t c1 = std::min(c0 + 1, x.cols() - 1);
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  return (1 - fr) * ((1 - fc) * x(r0, c0) + fc * x(r0, c1)) +
         fr * ((1 - fc) * x(r1, c0) + fc * x(r1, c1));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  if (quoted) throw ValidationError("unterminated quote in corpus manifest line: " + line);
  return fields;
}

}  // namespace

void require_low_dynamic_range(const Image& x, const std::string& what) {
  if (x.empty()) throw ValidationError(what + " is empty");
  if (!x.all_finite()) throw ValidationError(what + " contains non-finite values");
  if (x.min() < 0.0 || x.max() > 1.0) {
    throw ValidationError(what + " must lie in [0, 1]; got range [" + std::to_string(x.min()) +
                          ", " + std::to_string(x.max()) + "]");
  }
}

Image normalize_peak(const Image& raw) {
  if (raw.empty() || !raw.all_finite()) throw ValidationError("raw image is empty or non-finite");
  const double peak = raw.max();
  if (!(peak > 0.0)) throw ValidationError("raw image has no positive intensity to normalize");
  Image out = raw;
  for (double& v : out.values()) v = std::max(v / peak, 0.0);
  return out;
}

double estimate_background_sigma(const Image& x, std::optional<Box> box, std::size_t block) {
  if (x.empty()) throw ValidationError("background estimate of an empty image");
  if (box) {
    if (box->height == 0 || box->width == 0 || box->row + box->height > x.rows() ||
        box->col + box->width > x.cols()) {
      throw ValidationError("background box lies outside the image");
    }
    if (box->height * box->width < 2) throw ValidationError("background box needs at least 2 pixels");
    return sample_std(crop(x, box->row, box->col, box->height, box->width).values());
  }
  if (block < 2) throw ValidationError("background block size must be at least 2");
  block = std::min({block, x.rows(), x.cols()});
  struct Cell {
    double mean;
    std::size_t row, col;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r + block <= x.rows(); r += block) {
    for (std::size_t c = 0; c + block <= x.cols(); c += block) {
      const auto v = crop(x, r, c, block, block).values();
      double mean = 0.0;
      for (double p : v) mean += p;
      cells.push_back({mean / static_cast<double>(v.size()), r, c});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.mean < b.mean; });
  const std::size_t keep = std::max<std::size_t>(1, cells.size() / 10);
  // Diagonal second differences (x00 - x01 - x10 + x11) / 2 cancel smooth gradients and have
  // the noise standard deviation for white noise; the median absolute value makes the pooled
  // estimate robust to leftover structure.
  std::vector<double> diffs;
  for (std::size_t k = 0; k < keep; ++k) {
    const std::size_t r0 = cells[k].row, c0 = cells[k].col;
    for (std::size_t r = r0; r + 1 < r0 + block; r += 2) {
      for (std::size_t c = c0; c + 1 < c0 + block; c += 2) {
        diffs.push_back(std::abs(0.5 * (x(r, c) - x(r, c + 1) - x(r + 1, c) + x(r + 1, c + 1))));
      }
    }
  }
  const auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  return *mid / 0.6744897501960817;
}

Image symmetric_pad(const Image& x, std::size_t rows, std::size_t cols) {
  if (x.empty()) throw ValidationError("cannot pad an empty image");
  if (rows < x.rows() || cols < x.cols()) throw ValidationError("padding target smaller than image");
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t sr = mirror_index(r, x.rows());
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = x(sr, mirror_index(c, x.cols()));
  }
  return out;
}

PreprocessResult preprocess_raw(const LowDRImage& raw, double sigma_hat,
                                const PreprocessOptions& options) {
  if (!(sigma_hat > 0.0) || !std::isfinite(sigma_hat)) {
    throw ValidationError("sigma_hat must be positive and finite");
  }
  if (raw.pixels.empty() || !raw.pixels.all_finite()) {
    throw ValidationError("raw image is empty or non-finite");
  }
  const std::size_t mult = std::size_t{1} << options.dict_depth;
  const std::size_t rows = (raw.pixels.rows() + mult - 1) / mult * mult;
  const std::size_t cols = (raw.pixels.cols() + mult - 1) / mult * mult;
  const Image padded = symmetric_pad(raw.pixels, rows, cols);

  ri::IdentityMeasurement op(rows, cols);
  solvers::SolverConfig config;
  config.gamma_factor = 1.0;
  config.lambda = sigma_hat;
  config.rho = sigma_hat;
  config.K = 1;
  config.xi1 = options.xi1;
  config.xi2 = options.xi2;
  config.max_iterations = options.max_iterations;
  config.prox_max_iter = options.prox_max_iter;
  config.dict_depth = options.dict_depth;
  PreprocessResult result;
  result.report = solvers::run_usara(op, ri::as_measurements(padded), config);
  Image out = crop(result.report.image, 0, 0, raw.pixels.rows(), raw.pixels.cols());
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  result.image = {std::move(out), raw.floor};
  return result;
}

std::vector<LowDRImage> split_tiles(const LowDRImage& img, std::size_t tile) {
  if (tile == 0) throw ValidationError("tile size must be positive");
  if (img.pixels.empty()) return {};
  const std::size_t tr = (img.pixels.rows() + tile - 1) / tile;
  const std::size_t tc = (img.pixels.cols() + tile - 1) / tile;
  const Image padded = symmetric_pad(img.pixels, tr * tile, tc * tile);
  std::vector<LowDRImage> tiles;
  for (std::size_t i = 0; i < tr; ++i) {
    for (std::size_t j = 0; j < tc; ++j) {
      tiles.push_back({crop(padded, i * tile, j * tile, tile, tile), img.floor});
    }
  }
  return tiles;
}

double solve_exponentiation(double sigma, double floor) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ValidationError("sigma must lie in (0, 1)");
  if (!(floor > 0.0 && floor < 1.0)) throw ValidationError("floor level must lie in (0, 1)");
  // With b = a sigma the equation is b = sigma (1 + b)^(1/floor). In log form
  // g(b) = log sigma + log1p(b) / floor - log b decreases up to b* = floor / (1 - floor) and
  // increases after it, so the large root is bracketed by [b*, hi] with g(hi) > 0.
  const auto g = [&](double b) { return std::log(sigma) + std::log1p(b) / floor - std::log(b); };
  const double bstar = floor / (1.0 - floor);
  if (g(bstar) >= 0.0) {
    throw ValidationError("dynamic range 1/sigma is unreachable for this floor level: no root beyond the trivial one");
  }
  double lo = bstar, hi = 2.0 * bstar;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("exponentiation root bracket overflowed");
  }
  for (int k = 0; k < 2000 && lo < hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  const double b = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
  const double a = b / sigma;
  if (!(a > 1.0)) {
    throw ValidationError("exponentiation parameter " + std::to_string(a) + " is not above 1");
  }
  return a;
}

double exponentiate(double u, double a) { return std::expm1(u * std::log(a)) / a; }

Image exponentiate(const Image& low, double a) {
  if (!(a > 1.0) || !std::isfinite(a)) throw ValidationError("exponentiation parameter must exceed 1");
  Image out(low.rows(), low.cols());
  for (std::size_t j = 0; j < low.size(); ++j) out[j] = exponentiate(low[j], a);
  return out;
}

TrainingPair make_pair(const Image& low, double a, double sigma, std::uint64_t seed) {
  require_low_dynamic_range(low, "training image");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be nonnegative");
  TrainingPair pair;
  pair.groundtruth = exponentiate(low, a);
  pair.noisy = pair.groundtruth;
  pair.sigma = sigma;
  pair.a = a;
  pair.seed = seed;
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (double& v : pair.noisy.values()) v += sigma * gauss(rng);
  }
  return pair;
}

std::vector<Image> extract_patches(const Image& img, const PatchOptions& options) {
  if (options.count == 0) return {};
  const std::size_t s = options.size;
  if (s == 0) throw ValidationError("patch size must be positive");
  if (s > img.rows() || s > img.cols()) {
    throw ValidationError("patch size " + std::to_string(s) + " exceeds image dimensions " +
                          std::to_string(img.rows()) + "x" + std::to_string(img.cols()));
  }
  if (options.augment && !(options.min_zoom > 0.0 && options.min_zoom <= options.max_zoom)) {
    throw ValidationError("zoom range must be positive and ordered");
  }
  std::mt19937_64 rng(options.seed);
  std::vector<Image> patches;
  patches.reserve(options.count);
  for (std::size_t k = 0; k < options.count; ++k) {
    if (!options.augment) {
      std::uniform_int_distribution<std::size_t> row(0, img.rows() - s), col(0, img.cols() - s);
      const std::size_t r0 = row(rng);
      patches.push_back(crop(img, r0, col(rng), s, s));
      continue;
    }
    // The source window s / zoom must fit inside the image.
    const double fit = static_cast<double>(s) / static_cast<double>(std::min(img.rows(), img.cols()));
    std::uniform_real_distribution<double> zoom_dist(options.min_zoom, options.max_zoom);
    const double zoom = std::max(zoom_dist(rng), fit);
    const double window = static_cast<double>(s) / zoom;
    std::uniform_real_distribution<double> top(0.0, static_cast<double>(img.rows()) - window);
    std::uniform_real_distribution<double> left(0.0, static_cast<double>(img.cols()) - window);
    const double r0 = top(rng), c0 = left(rng);
    Image patch(s, s);
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) {
        patch(r, c) = bilinear(img, r0 + (r + 0.5) / zoom - 0.5, c0 + (c + 0.5) / zoom - 0.5);
      }
    }
    const auto g = denoiser::Dihedral::from_index(static_cast<int>(rng() % 8));
    patches.push_back(denoiser::transform(patch, g));
  }
  return patches;
}

void write_corpus_manifest(const fs::path& corpus_dir, const std::vector<CorpusEntry>& entries) {
  fs::create_directories(corpus_dir);
  std::ofstream out(corpus_dir / kCorpusManifest);
  if (!out) throw ValidationError("cannot write corpus manifest in " + corpus_dir.string());
  out << "filename,sigma_hat,credit\n";
  out.precision(17);
  for (const CorpusEntry& e : entries) {
    out << csv_field(e.filename) << ',' << e.sigma_hat << ',' << csv_field(e.credit) << '\n';
  }
}

std::vector<CorpusEntry> read_corpus_manifest(const fs::path& corpus_dir) {
  const fs::path path = corpus_dir / kCorpusManifest;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty corpus manifest " + path.string());
  const auto header = parse_csv_line(line);
  if (header.size() < 2 || header[0] != "filename" || header[1] != "sigma_hat") {
    throw ValidationError("corpus manifest header must start with filename,sigma_hat");
  }
  std::vector<CorpusEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = parse_csv_line(line);
    if (f.size() < 2) throw ValidationError("corpus manifest line has too few fields: " + line);
    CorpusEntry e;
    e.filename = f[0];
    try {
      e.sigma_hat = std::stod(f[1]);
    } catch (const std::exception&) {
      throw ValidationError("bad sigma_hat '" + f[1] + "' in corpus manifest");
    }
    if (f.size() > 2) e.credit = f[2];
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<CorpusEntry> build_corpus(const fs::path& corpus_dir, const PreprocessOptions& options) {
  const fs::path raw_dir = corpus_dir / "raw";
  if (!fs::is_directory(raw_dir)) throw ValidationError("corpus has no raw/ directory: " + corpus_dir.string());
  std::map<std::string, CorpusEntry> known;
  if (fs::exists(corpus_dir / kCorpusManifest)) {
    for (auto& e : read_corpus_manifest(corpus_dir)) known[e.filename] = e;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(raw_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".img") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(corpus_dir / "low");

  std::vector<CorpusEntry> entries;
  for (const fs::path& file : files) {
    const std::string name = file.filename().string();
    CorpusEntry e = known.count(name) ? known[name] : CorpusEntry{name, 0.0, ""};
    const Image normalized = normalize_peak(load_image(file));
    if (!(e.sigma_hat > 0.0)) e.sigma_hat = estimate_background_sigma(normalized);
    if (!(e.sigma_hat > 0.0)) {
      throw ValidationError("could not estimate a positive noise level for " + name +
                            "; supply sigma_hat in the manifest");
    }
    const auto result = preprocess_raw({normalized, kDefaultFloor}, e.sigma_hat, options);
    save_image(result.image.pixels, corpus_dir / "low" / name);
    entries.push_back(std::move(e));
  }
  write_corpus_manifest(corpus_dir, entries);
  return entries;
}

}  // namespace airi::dataset
