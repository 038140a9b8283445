#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "airi/dataset/dataset.hpp"
#include "airi/errors.hpp"
#include "airi/image_io.hpp"
#include "oracles.hpp"

using namespace airi;
using namespace airi::dataset;
namespace fs = std::filesystem;

namespace {

/// Large root of b = sigma (1 + b)^(1/floor) by plain bisection on the untransformed equation.
long double exponentiation_oracle(long double sigma, long double floor) {
  const auto f = [&](long double b) { return sigma * std::pow(1.0L + b, 1.0L / floor) - b; };
  long double lo = floor / (1.0L - floor), hi = 1.0L;
  while (f(hi) < 0) hi *= 2;
  for (int k = 0; k < 200; ++k) {
    const long double mid = 0.5L * (lo + hi);
    (f(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5L * (lo + hi) / sigma;
}

Image smooth_scene(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.2 * n, 0.8 * n), width(1.5, 0.15 * n);
  Image x(n, n, 0.02);
  for (int s = 0; s < 3; ++s) {
    const double r0 = pos(rng), c0 = pos(rng), w = width(rng);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        x(r, c) += std::exp(-0.5 * ((r - r0) * (r - r0) + (c - c0) * (c - c0)) / (w * w));
      }
    }
  }
  return (1.0 / x.max()) * x;
}

}  // namespace

TEST_CASE("exponentiation parameter solves the dynamic-range equation") {
  const double a = solve_exponentiation(1e-4, 1.0 / 64);
  CHECK(a == doctest::Approx(1166.5908181986724).epsilon(1e-12));
  CHECK(std::abs(a - static_cast<double>(exponentiation_oracle(1e-4L, 1.0L / 64))) <= 1e-9 * a);
  CHECK(std::abs(a - std::pow(1 + a * 1e-4, 64.0)) <= 1e-9 * a);
  const double b = a * 1e-4;
  CHECK(std::abs(b - 1e-4 * std::pow(1 + b, 64.0)) < 1e-12);
  // Nominal dynamic range equals 1 / sigma.
  CHECK(a / (std::pow(a, 1.0 / 64) - 1) == doctest::Approx(1e4).epsilon(1e-6));

  for (double sigma : {1e-3, 1.4e-4, 9.3e-5, 1e-5}) {
    const double s = solve_exponentiation(sigma);
    CHECK(std::abs(s - static_cast<double>(exponentiation_oracle(sigma, 1.0L / 64))) <= 1e-9 * s);
    CHECK(s / (std::pow(s, 1.0 / 64) - 1) == doctest::Approx(1.0 / sigma).epsilon(1e-6));
  }
  // A floor so high that the target range is unreachable.
  CHECK_THROWS_AS(solve_exponentiation(0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(solve_exponentiation(0.0), ValidationError);
  CHECK_THROWS_AS(solve_exponentiation(1e-4, 1.0), ValidationError);
}

TEST_CASE("exponentiation values and monotonicity") {
  CHECK(exponentiate(0.0, 1e3) == 0.0);
  CHECK(exponentiate(1.0, 1e3) == doctest::Approx(0.999).epsilon(1e-14));
  CHECK(exponentiate(1.0 / 64, 1e3) == doctest::Approx(1.13973859994802e-4).epsilon(1e-12));

  std::mt19937_64 rng(4);
  const Image low = oracle::random_image(16, 16, rng, 0.0, 1.0);
  const Image u = exponentiate(low, 1e3);
  for (std::size_t i = 0; i < low.size(); ++i) {
    for (std::size_t j = 0; j < low.size(); ++j) {
      if (low[i] < low[j]) CHECK(u[i] < u[j]);
    }
  }
  const auto argmax = [](const Image& x) {
    return std::max_element(x.values().begin(), x.values().end()) - x.values().begin();
  };
  CHECK(argmax(low) == argmax(u));
  CHECK(u.min() >= 0.0);
  CHECK(u.max() <= 1.0);
  CHECK_THROWS_AS(exponentiate(low, 1.0), ValidationError);
}

TEST_CASE("training pairs") {
  std::mt19937_64 rng(5);
  const Image low = oracle::random_image(32, 32, rng, 0.0, 1.0);
  const auto clean = make_pair(low, 1e3, 0.0, 7);
  CHECK(clean.noisy == clean.groundtruth);
  CHECK(clean.groundtruth == exponentiate(low, 1e3));

  const auto p1 = make_pair(low, 1e3, 0.05, 9);
  const auto p2 = make_pair(low, 1e3, 0.05, 9);
  CHECK(p1.noisy == p2.noisy);
  CHECK(p1.groundtruth == p2.groundtruth);
  CHECK_FALSE(make_pair(low, 1e3, 0.05, 10).noisy == p1.noisy);

  Image bad = low;
  bad[0] = 1.5;
  CHECK_THROWS_AS(make_pair(bad, 1e3, 0.05, 1), ValidationError);
}

TEST_CASE("pair noise has the requested statistics") {
  const Image low(1000, 1000, 0.5);
  const double sigma = 0.01;
  const auto p = make_pair(low, 1e3, sigma, 2024);
  double mean = 0.0, ss = 0.0;
  for (std::size_t j = 0; j < low.size(); ++j) mean += p.noisy[j] - p.groundtruth[j];
  mean /= static_cast<double>(low.size());
  for (std::size_t j = 0; j < low.size(); ++j) {
    const double e = p.noisy[j] - p.groundtruth[j] - mean;
    ss += e * e;
  }
  const double sd = std::sqrt(ss / static_cast<double>(low.size() - 1));
  CHECK(std::abs(mean) <= 0.01 * sigma);
  CHECK(sd == doctest::Approx(sigma).epsilon(0.01));
}

TEST_CASE("symmetric padding and tiling") {
  Image x(3, 2);
  for (std::size_t j = 0; j < 6; ++j) x[j] = static_cast<double>(j);
  const Image p = symmetric_pad(x, 7, 5);
  // Rows 0 1 2 | 2 1 0 | 0 and columns 0 1 | 1 0 | 0.
  const std::size_t rows[7] = {0, 1, 2, 2, 1, 0, 0};
  const std::size_t cols[5] = {0, 1, 1, 0, 0};
  for (std::size_t r = 0; r < 7; ++r) {
    for (std::size_t c = 0; c < 5; ++c) CHECK(p(r, c) == x(rows[r], cols[c]));
  }

  std::mt19937_64 rng(1);
  const LowDRImage big{oracle::random_image(1024, 1024, rng, 0.0, 1.0)};
  const auto tiles = split_tiles(big, 512);
  REQUIRE(tiles.size() == 4);
  CHECK(tiles[3].pixels(0, 0) == big.pixels(512, 512));
  CHECK(tiles[1].pixels(511, 511) == big.pixels(511, 1023));

  const LowDRImage odd{oracle::random_image(600, 600, rng, 0.0, 1.0), 0.02};
  const auto t2 = split_tiles(odd, 512);
  REQUIRE(t2.size() == 4);
  CHECK(t2[0].floor == 0.02);
  for (const auto& t : t2) CHECK((t.pixels.rows() == 512 && t.pixels.cols() == 512));
  // The 424-pixel margin mirrors the last rows and columns.
  CHECK(t2[3].pixels(600 - 512, 600 - 512) == odd.pixels(599, 599));
  CHECK(t2[3].pixels(511, 511) == odd.pixels(600 - 424, 600 - 424));
  CHECK(t2[2].pixels(88, 5) == odd.pixels(599, 5));
  CHECK(t2[2].pixels(89, 5) == odd.pixels(598, 5));
  CHECK_THROWS_AS(split_tiles(odd, 0), ValidationError);
}

TEST_CASE("patch extraction") {
  std::mt19937_64 rng(3);
  const Image tile = oracle::random_image(512, 512, rng, 0.0, 1.0);
  PatchOptions opts;
  CHECK(extract_patches(tile, opts).empty());

  opts.count = 50;
  opts.seed = 11;
  const auto a = extract_patches(tile, opts);
  const auto b = extract_patches(tile, opts);
  REQUIRE(a.size() == 50);
  CHECK(a == b);
  for (const Image& p : a) {
    CHECK((p.rows() == 46 && p.cols() == 46));
    // Plain crops copy pixels, so every patch value occurs in the tile.
    CHECK(std::find(tile.values().begin(), tile.values().end(), p(17, 23)) != tile.values().end());
  }

  opts.augment = true;
  const auto c = extract_patches(tile, opts);
  CHECK(c == extract_patches(tile, opts));
  for (const Image& p : c) {
    CHECK((p.rows() == 46 && p.cols() == 46));
    CHECK(p.min() >= tile.min());
    CHECK(p.max() <= tile.max());
  }

  // Zoom 1 with an affine ramp reproduces a crop of the ramp up to the dihedral transform.
  Image ramp(64, 64);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t cc = 0; cc < 64; ++cc) ramp(r, cc) = 0.01 * r + 0.001 * cc;
  }
  PatchOptions unit;
  unit.count = 5;
  unit.augment = true;
  unit.min_zoom = unit.max_zoom = 1.0;
  unit.size = 8;
  for (const Image& p : extract_patches(ramp, unit)) {
    double lo = p.min(), hi = p.max();
    CHECK(hi - lo == doctest::Approx(0.07 + 0.007).epsilon(1e-9));
  }

  opts.size = 600;
  CHECK_THROWS_AS(extract_patches(tile, opts), ValidationError);
}

TEST_CASE("preprocessing a flat noisy image returns a flat image") {
  const std::size_t n = 32;
  const double level = 0.4, sigma_hat = 0.01;
  const double npix = static_cast<double>(n * n);
  double grand = 0.0;
  int reduced = 0;
  for (int t = 0; t < 100; ++t) {
    std::mt19937_64 rng(1000 + t);
    std::normal_distribution<double> g(0.0, sigma_hat);
    Image raw(n, n, level);
    for (double& v : raw.values()) v += g(rng);
    const auto out = preprocess_raw({raw}, sigma_hat);
    grand += out.image.pixels.sum() / npix;
    const double mean = out.image.pixels.sum() / npix;
    double ss = 0.0;
    for (double v : out.image.pixels.values()) ss += (v - mean) * (v - mean);
    if (std::sqrt(ss / npix) < 0.5 * sigma_hat) ++reduced;
  }
  grand /= 100.0;
  CHECK(std::abs(grand - level) <= 2.0 * sigma_hat / std::sqrt(npix));
  CHECK(reduced == 100);
}

TEST_CASE("preprocessing limits and peak preservation") {
  const Image clean = smooth_scene(32, 4);
  const auto near_identity = preprocess_raw({clean}, 1e-12);
  CHECK(distance(near_identity.image.pixels, clean) <= 1e-8 * norm(clean));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.005);
  Image raw = clean;
  for (double& v : raw.values()) v += g(rng);
  const auto out = preprocess_raw({raw}, 0.005);
  CHECK(out.report.converged());
  CHECK(out.image.floor == kDefaultFloor);
  CHECK(std::abs(out.image.pixels.max() - clean.max()) <= 0.05 * clean.max());
  CHECK(distance(out.image.pixels, clean) < distance(raw, clean));
  CHECK_NOTHROW(require_low_dynamic_range(out.image.pixels, "output"));

  // Sides that are not multiples of 16 are padded for the solve and cropped back.
  const auto odd = preprocess_raw({Image(20, 27, 0.3)}, 0.01);
  CHECK((odd.image.pixels.rows() == 20 && odd.image.pixels.cols() == 27));
  CHECK_THROWS_AS(preprocess_raw({clean}, 0.0), ValidationError);
}

TEST_CASE("background noise estimate") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.02);
  Image x = smooth_scene(128, 2);
  for (double& v : x.values()) v = 0.1 * v;
  for (double& v : x.values()) v += g(rng);
  CHECK(estimate_background_sigma(x) == doctest::Approx(0.02).epsilon(0.15));
  Image flat(64, 64, 0.0);
  for (double& v : flat.values()) v = g(rng);
  CHECK(estimate_background_sigma(flat, Box{0, 0, 64, 64}) == doctest::Approx(0.02).epsilon(0.05));
  CHECK_THROWS_AS(estimate_background_sigma(flat, Box{60, 0, 10, 10}), ValidationError);
}

TEST_CASE("corpus manifest and build") {
  const fs::path dir = fs::temp_directory_path() / "airi_test_corpus";
  fs::remove_all(dir);
  fs::create_directories(dir / "raw");

  std::vector<CorpusEntry> entries = {{"a.img", 0.01, "Some Observatory, \"quoted\" credit"},
                                      {"b.img", 0.0, ""}};
  write_corpus_manifest(dir, entries);
  const auto back = read_corpus_manifest(dir);
  REQUIRE(back.size() == 2);
  CHECK(back[0].credit == entries[0].credit);
  CHECK(back[0].sigma_hat == 0.01);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.01);
  for (const char* name : {"a.img", "b.img"}) {
    Image raw = 3.0 * smooth_scene(32, name[0]);
    for (double& v : raw.values()) v += 3.0 * g(rng);
    save_image(raw, dir / "raw" / name);
  }
  const auto built = build_corpus(dir);
  REQUIRE(built.size() == 2);
  CHECK(built[0].sigma_hat == 0.01);
  CHECK(built[0].credit == entries[0].credit);
  CHECK(built[1].sigma_hat == doctest::Approx(0.01).epsilon(0.3));
  for (const char* name : {"a.img", "b.img"}) {
    const Image low = load_image(dir / "low" / name);
    CHECK_NOTHROW(require_low_dynamic_range(low, name));
    CHECK(low.max() > 0.9);
  }
  CHECK(read_corpus_manifest(dir).size() == 2);
  CHECK_THROWS_AS(build_corpus(dir / "missing"), ValidationError);
}
