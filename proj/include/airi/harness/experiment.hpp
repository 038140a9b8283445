#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "airi/harness/uv_tracks.hpp"
#include "airi/solvers/solvers.hpp"

namespace airi::harness {

enum class ExperimentMode { kReconstruct, kHeuristic };

/// Either a uv CSV file or generated tracks for each (duration, pointing seed).
struct CoverageSpec {
  std::optional<std::filesystem::path> csv;
  TrackOptions tracks;
  std::vector<double> durations_h = {4.0};
  std::vector<std::uint64_t> pointings = {1};
};

struct SyntheticSkies {
  std::size_t count = 0;
  std::size_t size = 512;
  std::uint64_t seed = 1;
};

struct DenoiserSpec {
  std::optional<std::filesystem::path> manifest;
  /// Built-in toy: "smoothing" (uses strength) or "identity".
  std::string toy;
  double strength = 0.5;
};

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kReconstruct;
  std::vector<std::filesystem::path> groundtruths;
  SyntheticSkies synthetic;
  CoverageSpec coverage;
  double isnr_db = 30.0;
  std::uint64_t noise_seed = 0;
  std::string solver = "airi";
  solvers::SolverConfig solver_config;
  DenoiserSpec denoiser;
  bool equivariant = false;
  std::uint64_t seed = 0;
  /// Multipliers of the heuristic value (sigma for AIRI, gamma*lambda for uSARA).
  std::vector<double> sweep = {1.0};
  std::filesystem::path output = "experiment_out";
  unsigned workers = 1;
  double png_saturation = 1.0;
  bool write_images = true;
  double lipschitz_tol = 1e-6;

  /// Relative paths resolve against `base_dir`. Throws ValidationError on bad configs.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
};

solvers::SolverConfig solver_config_from_json(const nlohmann::json& j);

struct MetricsRow {
  std::string run_id;
  std::string groundtruth;
  double duration_h = 0.0;
  std::uint64_t pointing = 0;
  double multiplier = 1.0;
  /// tau / sqrt(2 L), or gamma*lambda from the uSARA heuristic
  double heuristic = 0.0;
  double value_used = 0.0;
  double snr_db = 0.0;
  double logsnr_db = 0.0;
  int iterations = 0;
  std::string status;
  double gradient_s = 0.0;
  double regularizer_s = 0.0;
  double total_s = 0.0;
};

struct SweepSummary {
  double duration_h = 0.0;
  double multiplier = 1.0;
  std::size_t runs = 0;
  double snr_mean = 0.0;
  double snr_ci95 = 0.0;
  double logsnr_mean = 0.0;
  double logsnr_ci95 = 0.0;
};

struct HeuristicRow {
  std::string groundtruth;
  double duration_h = 0.0;
  std::uint64_t pointing = 0;
  std::size_t measurements = 0;
  double tau = 0.0;
  double lipschitz = 0.0;
  double sigma = 0.0;
};

struct HeuristicSummary {
  double duration_h = 0.0;
  std::size_t runs = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<SweepSummary> summary;
  std::vector<HeuristicRow> heuristics;
  std::vector<HeuristicSummary> heuristic_summary;
};

/// Mean and 1.96 * sample std / sqrt(n); the half-width is 0 for a single value.
std::pair<double, double> mean_ci95(const std::vector<double>& values);

/// Runs the (groundtruth x duration x pointing x sweep) grid on a worker pool. Each operator
/// is built once and shared by its runs. Failed runs are recorded with their error and the
/// grid continues. Writes metrics.csv, timings.csv, summary.csv (or heuristics.csv and
/// heuristic_summary.csv) and per-run images under `output`.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace airi::harness
