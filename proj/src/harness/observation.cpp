#include "airi/harness/observation.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "airi/errors.hpp"

namespace airi::harness {

namespace fs = std::filesystem;

void save_observation(const Observation& obs, const fs::path& dir) {
  if (obs.coverage.count() != obs.visibilities.size()) {
    throw ValidationError("observation has " + std::to_string(obs.coverage.count()) + " uv points but " +
                          std::to_string(obs.visibilities.size()) + " visibilities");
  }
  fs::create_directories(dir);
  const nlohmann::json meta = {{"rows", obs.rows},
                               {"cols", obs.cols},
                               {"cell_size", obs.coverage.cell_size},
                               {"tau", obs.tau},
                               {"count", obs.coverage.count()}};
  std::ofstream(dir / kObservationMeta) << meta.dump(2) << '\n';
  std::ofstream out(dir / kObservationData);
  if (!out) throw ValidationError("cannot write " + (dir / kObservationData).string());
  out << "u,v,re,im\n";
  char line[160];
  for (std::size_t i = 0; i < obs.visibilities.size(); ++i) {
    const auto& p = obs.coverage.points[i];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", p.u, p.v, obs.visibilities[i].real(),
                  obs.visibilities[i].imag());
    out << line;
  }
}

Observation load_observation(const fs::path& dir_or_meta) {
  const fs::path meta_path = fs::is_directory(dir_or_meta) ? dir_or_meta / kObservationMeta : dir_or_meta;
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw ValidationError("cannot open " + meta_path.string());
  Observation obs;
  std::size_t count = 0;
  try {
    const auto meta = nlohmann::json::parse(meta_in);
    obs.rows = meta.at("rows").get<std::size_t>();
    obs.cols = meta.at("cols").get<std::size_t>();
    obs.coverage.cell_size = meta.at("cell_size").get<double>();
    obs.tau = meta.at("tau").get<double>();
    count = meta.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(meta_path.string() + ": " + e.what());
  }
  if (!(obs.coverage.cell_size > 0.0)) throw ValidationError("observation cell_size must be positive");

  const fs::path data_path = meta_path.parent_path() / kObservationData;
  std::ifstream in(data_path);
  if (!in) throw ValidationError("cannot open " + data_path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("u,v,re,im", 0) != 0) throw ValidationError(data_path.string() + ": expected header u,v,re,im");
  obs.coverage.points.reserve(count);
  obs.visibilities.reserve(count);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double u, v, re, im;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &u, &v, &re, &im) != 4) {
      throw ValidationError(data_path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    obs.coverage.points.push_back({u, v});
    obs.visibilities.emplace_back(re, im);
  }
  if (obs.visibilities.size() != count) {
    throw ValidationError(data_path.string() + ": expected " + std::to_string(count) + " rows, found " +
                          std::to_string(obs.visibilities.size()));
  }
  return obs;
}

}  // namespace airi::harness
