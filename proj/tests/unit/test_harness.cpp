#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "airi/errors.hpp"
#include "airi/harness/experiment.hpp"
#include "airi/harness/metrics.hpp"
#include "airi/harness/observation.hpp"
#include "airi/harness/render.hpp"
#include "airi/harness/skies.hpp"
#include "airi/harness/uv_tracks.hpp"
#include "airi/image_io.hpp"
#include "airi/ri/imaging.hpp"
#include "airi/ri/nufft_operator.hpp"
#include "oracles.hpp"

using namespace airi;
using namespace airi::harness;
using namespace oracle;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("airi_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 20 log10(||a|| / ||a - b||) written out longhand.
double snr_oracle(const std::vector<double>& est, const std::vector<double>& truth) {
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += static_cast<long double>(truth[i]) * truth[i];
    den += static_cast<long double>(truth[i] - est[i]) * (truth[i] - est[i]);
  }
  return static_cast<double>(10.0L * std::log10(num / den));
}

std::vector<double> rlog_oracle(const std::vector<double>& x) {
  std::vector<double> out;
  for (double v : x) out.push_back(std::log10(1000.0 * v + 1.0) / 3.0);
  return out;
}

nlohmann::json small_experiment(const fs::path& out, unsigned workers) {
  return {{"synthetic", {{"count", 2}, {"size", 32}, {"seed", 5}}},
          {"coverage", {{"antennas", 8}, {"hours", {0.5}}, {"rate_per_h", 20}, {"pointings", {1, 2}}}},
          {"solver", "usara"},
          {"solver_config", {{"max_iterations", 40}, {"K", 5}, {"xi2", 1e-6}}},
          {"sweep", {0.5, 1.0}},
          {"isnr_db", 30},
          {"workers", workers},
          {"write_images", false},
          {"output", out.string()}};
}

}  // namespace

TEST_CASE("track sample counts follow baselines times samples") {
  TrackOptions t;
  for (auto [hours, expected] : {std::pair{1.0, 201600u}, {2.0, 403200u}, {4.0, 806400u}, {8.0, 1612800u}}) {
    CHECK(sample_count(hours, 100.0) * 64 * 63 / 2 == expected);
  }
  t.n_antennas = 64;
  t.delta_t_h = 1.0;
  t.pointing_seed = 3;
  const auto cov = gen_uv_tracks(t);
  CHECK(cov.count() == 201600u);
  for (const auto& p : cov.points) {
    CHECK(std::abs(p.u) <= cov.band_half_width() * (1 + 1e-12));
    CHECK(std::abs(p.v) <= cov.band_half_width() * (1 + 1e-12));
  }

  t.conjugate = true;
  t.delta_t_h = 0.5;
  t.n_antennas = 10;
  const auto doubled = gen_uv_tracks(t);
  t.conjugate = false;
  const auto single = gen_uv_tracks(t);
  REQUIRE(doubled.count() == 2 * single.count());
  for (std::size_t i = 0; i < single.count(); ++i) {
    CHECK(doubled.points[single.count() + i].u == doctest::Approx(-single.points[i].u));
    CHECK(doubled.points[single.count() + i].v == doctest::Approx(-single.points[i].v));
  }
}

TEST_CASE("two antennas and one sample give a single measurement") {
  TrackOptions t;
  t.layout = {{0.0, 0.0}, {120.0, 35.0}};
  t.delta_t_h = 0.01;
  t.rate_per_h = 100.0;
  const auto cov = gen_uv_tracks(t);
  CHECK(cov.count() == 1);
}

TEST_CASE("degenerate layouts are rejected") {
  TrackOptions t;
  t.layout = {{5.0, 5.0}, {5.0, 5.0}, {5.0, 5.0}};
  CHECK_THROWS_AS(gen_uv_tracks(t), ValidationError);
  t.layout = {{0.0, 0.0}};
  CHECK_THROWS_AS(gen_uv_tracks(t), ValidationError);
  t.layout.clear();
  t.delta_t_h = 0.0;
  CHECK_THROWS_AS(gen_uv_tracks(t), ValidationError);
}

TEST_CASE("tracks are reproducible from their seeds") {
  TrackOptions t;
  t.n_antennas = 12;
  t.delta_t_h = 1.0;
  t.pointing_seed = 9;
  const auto a = gen_uv_tracks(t);
  const auto b = gen_uv_tracks(t);
  REQUIRE(a.count() == b.count());
  for (std::size_t i = 0; i < a.count(); ++i) {
    CHECK(a.points[i].u == b.points[i].u);
    CHECK(a.points[i].v == b.points[i].v);
  }
  t.pointing_seed = 10;
  const auto c = gen_uv_tracks(t);
  CHECK(c.points[0].u != a.points[0].u);
}

TEST_CASE("layout CSV round trip") {
  const auto dir = scratch_dir("layout");
  const auto layout = random_layout(16, 4);
  save_layout_csv(layout, dir / "layout.csv");
  const auto back = load_layout_csv(dir / "layout.csv");
  REQUIRE(back.size() == layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    CHECK(back[i].east == doctest::Approx(layout[i].east).epsilon(1e-12));
    CHECK(back[i].north == doctest::Approx(layout[i].north).epsilon(1e-12));
  }
  std::ofstream(dir / "bad.csv") << "x,y\n1,2\n";
  CHECK_THROWS_AS(load_layout_csv(dir / "bad.csv"), ValidationError);
}

TEST_CASE("snr and logsnr match the direct formulas") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Image truth(16, 24), est(16, 24);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = std::pow(u(rng), 4);
      est[i] = std::max(0.0, truth[i] + 0.05 * (u(rng) - 0.5));
    }
    CHECK(std::abs(snr(est, truth) - snr_oracle(est.values(), truth.values())) <= 1e-10);
    CHECK(std::abs(logsnr(est, truth) -
                   snr_oracle(rlog_oracle(est.values()), rlog_oracle(truth.values()))) <= 1e-10);
  }
  CHECK(rlog(1.0) == doctest::Approx(std::log10(1001.0) / 3.0).epsilon(1e-15));
  CHECK(rlog(1.0) == doctest::Approx(1.0001446924931063).epsilon(1e-14));
  CHECK(rlog(1e-3) == doctest::Approx(std::log10(2.0) / 3.0).epsilon(1e-15));

  const Image sky = synthetic_sky(32, 32, 6);
  for (double delta : {1e-3, 1e-2, 0.1}) {
    const std::vector<double> scaled_px = [&] {
      std::vector<double> v = sky.values();
      for (double& p : v) p *= 1.0 + delta;
      return v;
    }();
    const Image scaled(32, 32, scaled_px);
    CHECK(std::abs(logsnr(scaled, sky) - snr_oracle(rlog_oracle(scaled_px), rlog_oracle(sky.values()))) <= 1e-10);
    CHECK(snr(scaled, sky) == doctest::Approx(-20.0 * std::log10(delta)).epsilon(1e-9));
  }
  CHECK(rlog(0.0) == 0.0);

  Image truth(4, 4, 0.5);
  CHECK(std::isinf(snr(truth, truth)));
  CHECK_THROWS_AS(snr(truth, Image(4, 4)), ValidationError);
  CHECK_THROWS_AS(snr(truth, Image(4, 5, 1.0)), ValidationError);
}

TEST_CASE("metrics are invariant to a common pixel permutation") {
  std::mt19937_64 rng(3);
  const Image truth = synthetic_sky(32, 32, 11);
  Image est = truth;
  std::normal_distribution<double> n(0.0, 1e-3);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] = std::max(0.0, est[i] + n(rng));
  std::vector<std::size_t> perm(truth.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Image pt(32, 32), pe(32, 32);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    pt[i] = truth[perm[i]];
    pe[i] = est[perm[i]];
  }
  CHECK(snr(pe, pt) == doctest::Approx(snr(est, truth)).epsilon(1e-12));
  CHECK(logsnr(pe, pt) == doctest::Approx(logsnr(est, truth)).epsilon(1e-12));
}

TEST_CASE("logsnr reacts to faint structure that snr hardly sees") {
  const Image truth = synthetic_sky(64, 64, 2);
  Image faint = truth;
  std::size_t touched = 0;
  for (std::size_t i = 0; i < faint.size(); ++i) {
    if (truth[i] < 1e-3) {
      faint[i] += 2e-3;
      ++touched;
    }
  }
  REQUIRE(touched > faint.size() / 4);
  const double drop_log = 200.0 - logsnr(faint, truth);  // relative to a near-perfect estimate
  const double drop_lin = 200.0 - snr(faint, truth);
  CHECK(logsnr(faint, truth) < snr(faint, truth));
  CHECK(drop_log > drop_lin);
  CHECK(snr(faint, truth) > 20.0);
}

TEST_CASE("residual image identities") {
  std::mt19937_64 rng(8);
  ri::UVCoverage cov = ri::coverage_from_normalized(random_normalized_points(300, rng));
  auto op = ri::build_operator(cov, 16, 16);
  const Image x = random_image(16, 16, rng);
  const auto y = op.forward(x);
  const Image r0 = residual_image(op, y, x);
  CHECK(*std::max_element(r0.values().begin(), r0.values().end()) <= 1e-12);
  CHECK(*std::min_element(r0.values().begin(), r0.values().end()) >= -1e-12);
  const Image r_zero = residual_image(op, y, Image(16, 16));
  const Image dirty = ri::dirty_image(op, y);
  CHECK(distance(r_zero, dirty) <= 1e-12 * norm(dirty));
  const Image z = random_image(16, 16, rng);
  const Image lhs = residual_image(op, y, z);
  const Image rhs = dirty - ri::dirty_image(op, op.forward(z));
  CHECK(distance(lhs, rhs) <= 1e-10 * norm(rhs));
}

TEST_CASE("confidence half-width uses the sample standard deviation") {
  auto [m, h] = mean_ci95({1.0, 2.0, 3.0, 4.0});
  CHECK(m == doctest::Approx(2.5));
  CHECK(h == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  auto [m1, h1] = mean_ci95({7.0});
  CHECK(m1 == 7.0);
  CHECK(h1 == 0.0);
  CHECK(std::isnan(mean_ci95({}).first));
}

TEST_CASE("PNG output") {
  const auto dir = scratch_dir("png");
  const Image sky = synthetic_sky(40, 24, 1);
  const auto levels = rlog_levels(sky, 0.5);
  REQUIRE(levels.size() == sky.size());
  CHECK(*std::max_element(levels.begin(), levels.end()) == 255);
  write_png(dir / "sky.png", 40, 24, levels);
  const std::string bytes = slurp(dir / "sky.png");
  REQUIRE(bytes.size() > 8);
  CHECK(bytes.substr(1, 3) == "PNG");
  const auto sym = symmetric_levels(Image(2, 2, std::vector<double>{-1.0, 0.0, 0.5, 1.0}));
  CHECK(sym[0] == 0);
  CHECK(sym[3] == 255);
  CHECK(std::abs(int(sym[1]) - 128) <= 1);
  CHECK_THROWS(write_png(dir / "bad.png", 3, 3, levels));
}

TEST_CASE("experiment config validation") {
  const auto base = small_experiment("out", 1);
  CHECK_NOTHROW(ExperimentConfig::from_json(base));
  auto both = base;
  both["coverage"]["csv"] = "uv.csv";
  CHECK_THROWS_AS(ExperimentConfig::from_json(both), ValidationError);
  auto none = base;
  none.erase("synthetic");
  CHECK_THROWS_AS(ExperimentConfig::from_json(none), ValidationError);
  auto neg = base;
  neg["sweep"] = {1.0, -2.0};
  CHECK_THROWS_AS(ExperimentConfig::from_json(neg), ValidationError);
  auto solver = base;
  solver["solver"] = "clean";
  CHECK_THROWS_AS(ExperimentConfig::from_json(solver), ValidationError);
  const auto rel = ExperimentConfig::from_json({{"groundtruths", {"a.img"}}, {"coverage", {{"csv", "uv.csv"}}}},
                                               "/data");
  CHECK(rel.groundtruths.front() == fs::path("/data/a.img"));
  CHECK(*rel.coverage.csv == fs::path("/data/uv.csv"));
}

TEST_CASE("experiment grid is deterministic across worker counts") {
  const auto dir = scratch_dir("experiment");
  const auto r1 = run_experiment(ExperimentConfig::from_json(small_experiment(dir / "one", 1)));
  const auto r2 = run_experiment(ExperimentConfig::from_json(small_experiment(dir / "two", 3)));
  CHECK(r1.rows.size() == 2 * 2 * 2);
  for (const auto& row : r1.rows) {
    CHECK(row.status.rfind("failed", 0) == std::string::npos);
    CHECK(std::isfinite(row.snr_db));
    CHECK(row.value_used == doctest::Approx(row.multiplier * row.heuristic));
  }
  const std::string m1 = slurp(dir / "one" / "metrics.csv");
  CHECK(!m1.empty());
  CHECK(m1 == slurp(dir / "two" / "metrics.csv"));
  CHECK(slurp(dir / "one" / "summary.csv") == slurp(dir / "two" / "summary.csv"));
  CHECK(fs::exists(dir / "one" / "timings.csv"));
  CHECK(r1.summary.size() == 2);
  CHECK(r1.summary.front().runs == 4);
}

TEST_CASE("single-run experiment writes one row and its images") {
  const auto dir = scratch_dir("single");
  const Image sky = synthetic_sky(32, 32, 4);
  save_image(sky, dir / "sky.img");
  nlohmann::json j = {{"groundtruths", {"sky.img"}},
                      {"coverage", {{"antennas", 6}, {"hours", 0.5}, {"rate_per_h", 20}, {"pointings", {4}}}},
                      {"solver", "airi"},
                      {"denoiser", {{"toy", "smoothing"}}},
                      {"solver_config", {{"max_iterations", 30}}},
                      {"output", "out"}};
  const auto result = run_experiment(ExperimentConfig::from_json(j, dir));
  REQUIRE(result.rows.size() == 1);
  CHECK(result.rows[0].groundtruth == "sky.img");
  CHECK(result.rows[0].iterations > 0);
  const std::string metrics = slurp(dir / "out" / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 2);
  const fs::path run = dir / "out" / "runs" / result.rows[0].run_id;
  for (const char* f : {"model.img", "residual.img", "dirty.img", "model.png", "residual.png", "dirty.png"}) {
    CHECK(fs::exists(run / f));
  }
}

TEST_CASE("failed runs are recorded and the grid continues") {
  const auto dir = scratch_dir("failing");
  // Noise-free data makes the heuristic value zero, which cannot drive a run.
  auto j = small_experiment(dir / "out", 1);
  j["isnr_db"] = std::numeric_limits<double>::infinity();
  j["sweep"] = {1.0};
  const auto result = run_experiment(ExperimentConfig::from_json(j));
  REQUIRE(result.rows.size() == 4);
  for (const auto& row : result.rows) CHECK(row.status.rfind("failed", 0) == 0);
  CHECK(fs::exists(dir / "out" / "metrics.csv"));
}

TEST_CASE("heuristic mode tabulates sigma per duration") {
  const auto dir = scratch_dir("heuristic");
  nlohmann::json j = {{"mode", "heuristic"},
                      {"synthetic", {{"count", 2}, {"size", 32}}},
                      {"coverage", {{"antennas", 10}, {"hours", {0.5, 1.0}}, {"rate_per_h", 20}, {"pointings", {1, 2}}}},
                      {"output", (dir / "out").string()}};
  const auto result = run_experiment(ExperimentConfig::from_json(j));
  CHECK(result.heuristics.size() == 2 * 2 * 2);
  REQUIRE(result.heuristic_summary.size() == 2);
  for (const auto& r : result.heuristics) {
    CHECK(r.sigma == doctest::Approx(r.tau / std::sqrt(2.0 * r.lipschitz)));
    CHECK(r.measurements == sample_count(r.duration_h, 20.0) * 45);
  }
  CHECK(result.heuristic_summary[0].min <= result.heuristic_summary[0].mean);
  CHECK(fs::exists(dir / "out" / "heuristic_summary.csv"));
}

TEST_CASE("observation files round trip exactly") {
  const auto dir = scratch_dir("observation");
  harness::Observation obs;
  TrackOptions t;
  t.n_antennas = 6;
  t.delta_t_h = 0.2;
  obs.coverage = gen_uv_tracks(t);
  obs.rows = 16;
  obs.cols = 16;
  auto op = ri::build_operator(obs.coverage, 16, 16);
  auto data = ri::simulate_visibilities(op, synthetic_sky(16, 16, 3), 20.0, 5);
  obs.visibilities = data.values;
  obs.tau = data.tau;
  harness::save_observation(obs, dir);
  const auto back = harness::load_observation(dir);
  CHECK(back.rows == 16);
  CHECK(back.tau == obs.tau);
  CHECK(back.coverage.cell_size == obs.coverage.cell_size);
  REQUIRE(back.visibilities.size() == obs.visibilities.size());
  for (std::size_t i = 0; i < obs.visibilities.size(); ++i) {
    CHECK(back.visibilities[i] == obs.visibilities[i]);
    CHECK(back.coverage.points[i].u == obs.coverage.points[i].u);
  }
  std::ofstream(dir / harness::kObservationData, std::ios::app) << "1,2,3,4\n";
  CHECK_THROWS_AS(harness::load_observation(dir), ValidationError);
}

TEST_CASE("zero estimate gives exactly 0 dB") {
  const Image truth = synthetic_sky(16, 16, 9);
  CHECK(snr(Image(16, 16), truth) == 0.0);
}
