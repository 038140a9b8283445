#include "airi/ri/uv_coverage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "airi/errors.hpp"

namespace airi::ri {

double fit_cell_size(const std::vector<UVPoint>& points) {
  double extent = 0.0;
  for (const auto& p : points) extent = std::max({extent, std::abs(p.u), std::abs(p.v)});
  if (extent == 0.0) throw ValidationError("coverage has no extent; cannot fit the band");
  return 0.5 / extent;
}

UVCoverage coverage_from_normalized(const std::vector<UVPoint>& omegas) {
  UVCoverage cov;
  cov.cell_size = 1.0;
  cov.points.reserve(omegas.size());
  for (const auto& w : omegas) {
    cov.points.push_back({w.u / (2.0 * std::numbers::pi), w.v / (2.0 * std::numbers::pi)});
  }
  return cov;
}

UVCoverage load_coverage_csv(const std::filesystem::path& path, std::optional<double> cell_size) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open coverage file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty coverage file");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "u,v") throw ValidationError(path.string() + ": expected header `u,v`");

  UVCoverage cov;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    std::string a, b;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b)) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected two fields");
    }
    try {
      cov.points.push_back({std::stod(a), std::stod(b)});
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  if (cov.points.empty()) throw ValidationError(path.string() + ": no uv points");
  cov.cell_size = cell_size ? *cell_size : fit_cell_size(cov.points);
  if (!(cov.cell_size > 0.0)) throw ValidationError("cell size must be positive");
  return cov;
}

void save_coverage_csv(const UVCoverage& coverage, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "u,v\n" << std::setprecision(17);
  for (const auto& p : coverage.points) out << p.u << ',' << p.v << '\n';
}

}  // namespace airi::ri
