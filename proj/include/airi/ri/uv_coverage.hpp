#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace airi::ri {

/// Spatial frequency in units of the observing wavelength.
struct UVPoint {
  double u = 0.0;
  double v = 0.0;
};

struct CoverageMetadata {
  int pointing_id = 0;
  double duration_h = 0.0;
  double rate_per_h = 0.0;
};

/// Sampled Fourier modes plus the pixel size that fixes the imaging band.
/// A point is in band when |u|, |v| <= 1 / (2 * cell_size).
struct UVCoverage {
  std::vector<UVPoint> points;
  double cell_size = 1.0;  // radians per pixel
  CoverageMetadata metadata;

  std::size_t count() const { return points.size(); }
  double band_half_width() const { return 0.5 / cell_size; }
};

/// Cell size that places the outermost point exactly on the band edge.
double fit_cell_size(const std::vector<UVPoint>& points);

/// Builds a coverage from normalized angular frequencies in [-pi, pi] (rad/pixel),
/// given as (omega_u, omega_v) pairs. Used for synthetic and test coverages.
UVCoverage coverage_from_normalized(const std::vector<UVPoint>& omegas);

/// CSV with a `u,v` header, values in wavelengths. Without an explicit cell size the
/// coverage is fitted to the band.
UVCoverage load_coverage_csv(const std::filesystem::path& path,
                             std::optional<double> cell_size = std::nullopt);
void save_coverage_csv(const UVCoverage& coverage, const std::filesystem::path& path);

}  // namespace airi::ri
