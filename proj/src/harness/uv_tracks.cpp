#include "airi/harness/uv_tracks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <numbers>
#include <random>

#include "airi/errors.hpp"

namespace airi::harness {
namespace {

constexpr double kDegree = std::numbers::pi / 180.0;
/// Hour angle swept per hour of observation.
constexpr double kRadiansPerHour = 15.0 * kDegree;

}  // namespace

std::vector<Antenna> random_layout(int n_antennas, std::uint64_t seed, double core_radius,
                                   double outer_radius) {
  if (n_antennas < 2) throw ValidationError("an array needs at least 2 antennas");
  if (!(core_radius > 0.0) || !(outer_radius >= core_radius)) {
    throw ValidationError("layout radii must satisfy 0 < core <= outer");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int core = (3 * n_antennas + 3) / 4;
  std::vector<Antenna> layout;
  for (int k = 0; k < n_antennas; ++k) {
    const double radius = k < core ? core_radius * unit(rng)
                                   : core_radius * std::pow(outer_radius / core_radius, unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    layout.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  return layout;
}

std::size_t sample_count(double delta_t_h, double rate_per_h) {
  if (!(delta_t_h > 0.0)) throw ValidationError("observation duration must be positive");
  if (!(rate_per_h > 0.0)) throw ValidationError("sampling rate must be positive");
  const double samples = std::round(rate_per_h * delta_t_h);
  if (samples < 1.0) throw ValidationError("observation yields no time samples");
  return static_cast<std::size_t>(samples);
}

ri::UVCoverage gen_uv_tracks(const TrackOptions& options) {
  const std::vector<Antenna> layout =
      options.layout.empty() ? random_layout(options.n_antennas, options.layout_seed) : options.layout;
  if (layout.size() < 2) throw ValidationError("an array needs at least 2 antennas");
  if (!(options.wavelength_m > 0.0)) throw ValidationError("wavelength must be positive");
  const std::size_t samples = sample_count(options.delta_t_h, options.rate_per_h);

  std::mt19937_64 rng(options.pointing_seed);
  std::uniform_real_distribution<double> dec_draw(-75.0, 15.0), ha_draw(-2.0, 2.0);
  const double declination = options.declination_deg ? *options.declination_deg : dec_draw(rng);
  const double ha_centre_h = ha_draw(rng);
  const double dec = declination * kDegree;
  const double lat = options.latitude_deg * kDegree;

  // Baselines in equatorial coordinates (X towards the meridian, Y east, Z to the pole).
  struct Baseline {
    double x, y, z;
  };
  std::vector<Baseline> baselines;
  for (std::size_t p = 0; p < layout.size(); ++p) {
    for (std::size_t q = p + 1; q < layout.size(); ++q) {
      const double east = layout[q].east - layout[p].east;
      const double north = layout[q].north - layout[p].north;
      baselines.push_back({-std::sin(lat) * north, east, std::cos(lat) * north});
    }
  }

  ri::UVCoverage cov;
  cov.points.reserve(baselines.size() * samples * (options.conjugate ? 2 : 1));
  for (std::size_t t = 0; t < samples; ++t) {
    const double hours = samples == 1 ? 0.0
                                      : options.delta_t_h * (static_cast<double>(t) / static_cast<double>(samples - 1) - 0.5);
    const double ha = (ha_centre_h + hours) * kRadiansPerHour;
    const double sh = std::sin(ha), ch = std::cos(ha);
    for (const Baseline& b : baselines) {
      const double u = (sh * b.x + ch * b.y) / options.wavelength_m;
      const double v = (-std::sin(dec) * ch * b.x + std::sin(dec) * sh * b.y + std::cos(dec) * b.z) /
                       options.wavelength_m;
      cov.points.push_back({u, v});
    }
  }
  if (options.conjugate) {
    const std::size_t m = cov.points.size();
    for (std::size_t i = 0; i < m; ++i) cov.points.push_back({-cov.points[i].u, -cov.points[i].v});
  }
  cov.cell_size = ri::fit_cell_size(cov.points);
  cov.metadata.pointing_id = static_cast<int>(options.pointing_seed);
  cov.metadata.duration_h = options.delta_t_h;
  cov.metadata.rate_per_h = options.rate_per_h;
  return cov;
}

}  // namespace airi::harness

namespace airi::harness {

std::vector<Antenna> load_layout_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open layout file " + path.string());
  std::string line;
  std::getline(in, line);
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "east,north") throw ValidationError(path.string() + ": expected header `east,north`");
  std::vector<Antenna> layout;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      layout.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
  }
  if (layout.size() < 2) throw ValidationError(path.string() + ": an array needs at least 2 antennas");
  return layout;
}

void save_layout_csv(const std::vector<Antenna>& layout, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "east,north\n" << std::setprecision(17);
  for (const Antenna& a : layout) out << a.east << ',' << a.north << '\n';
}

}  // namespace airi::harness
