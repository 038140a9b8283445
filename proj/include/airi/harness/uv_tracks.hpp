#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "airi/ri/uv_coverage.hpp"

namespace airi::harness {

/// Antenna position in local east/north coordinates, metres.
struct Antenna {
  double east = 0.0;
  double north = 0.0;
};

/// Seeded layout with the radial profile of a core-dominated array: three quarters of the
/// antennas in a centrally condensed core (radius uniform in [0, core_radius], so density
/// falls as 1/r), the rest log-uniform in radius out to `outer_radius`.
std::vector<Antenna> random_layout(int n_antennas, std::uint64_t seed, double core_radius = 500.0,
                                   double outer_radius = 4000.0);

struct TrackOptions {
  int n_antennas = 64;
  double delta_t_h = 4.0;
  double rate_per_h = 100.0;
  /// Draws the declination (when not given) and the hour angle at mid-observation.
  std::uint64_t pointing_seed = 0;
  std::optional<double> declination_deg;
  std::uint64_t layout_seed = 2022;
  double latitude_deg = -30.7;
  double wavelength_m = 0.3;
  /// Append the conjugate point (-u, -v) of every sample.
  bool conjugate = false;
  /// Explicit layout; overrides n_antennas and layout_seed when non-empty.
  std::vector<Antenna> layout;
};

/// Number of time samples: round(rate_per_h * delta_t_h).
std::size_t sample_count(double delta_t_h, double rate_per_h);

/// Earth-rotation synthesis: every baseline is projected onto the uv plane at each sample
/// of the hour-angle sweep. m = n(n-1)/2 * samples (twice that with conjugates). The cell
/// size is fitted so the outermost point lies on the band edge.
ri::UVCoverage gen_uv_tracks(const TrackOptions& options);

}  // namespace airi::harness

namespace airi::harness {

/// CSV with an `east,north` header in metres.
std::vector<Antenna> load_layout_csv(const std::filesystem::path& path);
void save_layout_csv(const std::vector<Antenna>& layout, const std::filesystem::path& path);

}  // namespace airi::harness
