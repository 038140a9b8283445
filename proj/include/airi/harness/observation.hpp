#pragma once

#include <filesystem>

#include "airi/ri/measurement.hpp"
#include "airi/ri/uv_coverage.hpp"

namespace airi::harness {

/// Everything needed to image one data set: coverage, visibilities, noise level and the
/// image grid they refer to.
struct Observation {
  ri::UVCoverage coverage;
  ri::Visibilities visibilities;
  double tau = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

inline constexpr const char* kObservationMeta = "observation.json";
inline constexpr const char* kObservationData = "observation.csv";

/// Writes observation.json ({rows, cols, cell_size, tau, count}) and observation.csv
/// (u,v,re,im with u, v in wavelengths) into `dir`.
void save_observation(const Observation& obs, const std::filesystem::path& dir);
/// Accepts the directory or its observation.json. Throws ValidationError on inconsistent files.
Observation load_observation(const std::filesystem::path& dir_or_meta);

}  // namespace airi::harness
