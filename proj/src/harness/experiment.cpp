#include "airi/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "airi/denoiser/model_io.hpp"
#include "airi/denoiser/toy_models.hpp"
#include "airi/errors.hpp"
#include "airi/harness/metrics.hpp"
#include "airi/harness/render.hpp"
#include "airi/harness/skies.hpp"
#include "airi/image_io.hpp"
#include "airi/ri/imaging.hpp"
#include "airi/ri/nufft_operator.hpp"

namespace airi::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Groundtruth {
  std::string name;
  Image image;
};

std::vector<Groundtruth> load_groundtruths(const ExperimentConfig& config) {
  std::vector<Groundtruth> out;
  for (const fs::path& p : config.groundtruths) out.push_back({p.filename().string(), load_image(p)});
  for (std::size_t k = 0; k < config.synthetic.count; ++k) {
    const std::uint64_t seed = config.synthetic.seed + k;
    out.push_back({"synthetic_" + std::to_string(seed),
                   synthetic_sky(config.synthetic.size, config.synthetic.size, seed)});
  }
  if (out.empty()) throw ValidationError("experiment has no groundtruth images");
  for (const auto& g : out) {
    if (!g.image.same_shape(out.front().image)) {
      throw ValidationError("all groundtruth images must share one shape");
    }
  }
  return out;
}

struct CoverageCase {
  double duration_h;
  std::uint64_t pointing;
  std::size_t duration_index;
  std::size_t pointing_index;
};

std::vector<CoverageCase> coverage_cases(const CoverageSpec& spec) {
  std::vector<CoverageCase> cases;
  if (spec.csv) {
    cases.push_back({0.0, 0, 0, 0});
    return cases;
  }
  for (std::size_t d = 0; d < spec.durations_h.size(); ++d) {
    for (std::size_t p = 0; p < spec.pointings.size(); ++p) {
      cases.push_back({spec.durations_h[d], spec.pointings[p], d, p});
    }
  }
  return cases;
}

ri::UVCoverage make_coverage(const CoverageSpec& spec, const CoverageCase& c) {
  if (spec.csv) return ri::load_coverage_csv(*spec.csv);
  TrackOptions t = spec.tracks;
  t.delta_t_h = c.duration_h;
  t.pointing_seed = c.pointing;
  return gen_uv_tracks(t);
}

std::shared_ptr<const denoiser::Denoiser> load_denoiser(const DenoiserSpec& spec, double* trained_sigma) {
  denoiser::ModelFile model;
  if (spec.manifest) {
    model = denoiser::load_model(*spec.manifest);
  } else if (spec.toy == "smoothing") {
    model = denoiser::smoothing_model(spec.strength);
  } else if (spec.toy == "identity") {
    model = denoiser::linear_residual_model({});
  } else {
    throw ValidationError("AIRI experiments need a denoiser manifest or a toy model name");
  }
  *trained_sigma = model.info.sigma;
  return denoiser::make_denoiser(model);
}

void run_pool(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::uint64_t data_seed(std::uint64_t base, std::size_t g, const CoverageCase& c) {
  return base + 1000003ULL * g + 1009ULL * c.duration_index + c.pointing_index;
}

void write_images(const fs::path& dir, const Image& model, const Image& residual, const Image& dirty,
                  double saturation) {
  fs::create_directories(dir);
  save_image(model, dir / "model.img");
  save_image(residual, dir / "residual.img");
  save_image(dirty, dir / "dirty.img");
  write_png(dir / "model.png", model.rows(), model.cols(), rlog_levels(model, saturation));
  write_png(dir / "residual.png", residual.rows(), residual.cols(), symmetric_levels(residual));
  write_png(dir / "dirty.png", dirty.rows(), dirty.cols(), symmetric_levels(dirty));
}

void write_reconstruction_csvs(const fs::path& out, const ExperimentResult& result) {
  std::ofstream metrics(out / "metrics.csv");
  metrics << "run_id,groundtruth,duration_h,pointing,multiplier,heuristic,value_used,snr_db,logsnr_db,iterations,status\n";
  std::ofstream timings(out / "timings.csv");
  timings << "run_id,gradient_s,regularizer_s,total_s\n";
  for (const MetricsRow& r : result.rows) {
    metrics << csv_escape(r.run_id) << ',' << csv_escape(r.groundtruth) << ',' << format_number(r.duration_h)
            << ',' << r.pointing << ',' << format_number(r.multiplier) << ',' << format_number(r.heuristic)
            << ',' << format_number(r.value_used) << ',' << format_number(r.snr_db) << ','
            << format_number(r.logsnr_db) << ',' << r.iterations << ',' << csv_escape(r.status) << '\n';
    timings << csv_escape(r.run_id) << ',' << format_number(r.gradient_s) << ','
            << format_number(r.regularizer_s) << ',' << format_number(r.total_s) << '\n';
  }
  std::ofstream summary(out / "summary.csv");
  summary << "duration_h,multiplier,runs,snr_mean,snr_ci95,logsnr_mean,logsnr_ci95\n";
  for (const SweepSummary& s : result.summary) {
    summary << format_number(s.duration_h) << ',' << format_number(s.multiplier) << ',' << s.runs << ','
            << format_number(s.snr_mean) << ',' << format_number(s.snr_ci95) << ','
            << format_number(s.logsnr_mean) << ',' << format_number(s.logsnr_ci95) << '\n';
  }
}

void write_heuristic_csvs(const fs::path& out, const ExperimentResult& result) {
  std::ofstream rows(out / "heuristics.csv");
  rows << "groundtruth,duration_h,pointing,measurements,tau,lipschitz,sigma\n";
  for (const HeuristicRow& r : result.heuristics) {
    rows << csv_escape(r.groundtruth) << ',' << format_number(r.duration_h) << ',' << r.pointing << ','
         << r.measurements << ',' << format_number(r.tau) << ',' << format_number(r.lipschitz) << ','
         << format_number(r.sigma) << '\n';
  }
  std::ofstream summary(out / "heuristic_summary.csv");
  summary << "duration_h,runs,mean,min,max\n";
  for (const HeuristicSummary& s : result.heuristic_summary) {
    summary << format_number(s.duration_h) << ',' << s.runs << ',' << format_number(s.mean) << ','
            << format_number(s.min) << ',' << format_number(s.max) << '\n';
  }
}

ExperimentResult run_heuristic(const ExperimentConfig& config, const std::vector<Groundtruth>& truths) {
  ExperimentResult result;
  const auto cases = coverage_cases(config.coverage);
  std::vector<std::vector<HeuristicRow>> per_case(cases.size());
  // Operators are large, so the pool works across coverages with one operator per worker.
  run_pool(cases.size(), config.workers, [&](std::size_t k) {
    const CoverageCase& c = cases[k];
    const auto cov = make_coverage(config.coverage, c);
    auto op = ri::build_operator(cov, truths.front().image.rows(), truths.front().image.cols());
    const double lipschitz = ri::spectral_norm(op, config.lipschitz_tol, 1000).value;
    for (const Groundtruth& g : truths) {
      const auto fx = op.forward(g.image);
      double energy = 0.0;
      for (const auto& v : fx) energy += std::norm(v);
      HeuristicRow row;
      row.groundtruth = g.name;
      row.duration_h = c.duration_h;
      row.pointing = c.pointing;
      row.measurements = fx.size();
      row.tau = ri::noise_level(std::sqrt(energy), fx.size(), config.isnr_db, ri::NoiseConvention::kPerVisibility);
      row.lipschitz = lipschitz;
      row.sigma = solvers::heuristic_sigma(row.tau, lipschitz);
      per_case[k].push_back(row);
    }
  });
  std::map<double, std::vector<double>> by_duration;
  for (const auto& rows : per_case) {
    for (const HeuristicRow& r : rows) {
      result.heuristics.push_back(r);
      by_duration[r.duration_h].push_back(r.sigma);
    }
  }
  for (const auto& [duration, values] : by_duration) {
    HeuristicSummary s;
    s.duration_h = duration;
    s.runs = values.size();
    s.mean = mean_ci95(values).first;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    result.heuristic_summary.push_back(s);
  }
  return result;
}

ExperimentResult run_reconstruct(const ExperimentConfig& config, const std::vector<Groundtruth>& truths) {
  ExperimentResult result;
  const bool airi = config.solver == "airi";
  double trained_sigma = 1.0;
  std::shared_ptr<const denoiser::Denoiser> model;
  if (airi) model = load_denoiser(config.denoiser, &trained_sigma);

  for (const CoverageCase& c : coverage_cases(config.coverage)) {
    const auto cov = make_coverage(config.coverage, c);
    auto op = ri::build_operator(cov, truths.front().image.rows(), truths.front().image.cols());
    ri::spectral_norm(op, config.lipschitz_tol, 5000);
    const double lipschitz = *op.lipschitz();

    std::vector<ri::VisibilitySet> data;
    for (std::size_t g = 0; g < truths.size(); ++g) {
      data.push_back(ri::simulate_visibilities(op, truths[g].image, config.isnr_db,
                                               data_seed(config.noise_seed, g, c)));
    }
    const std::size_t runs = truths.size() * config.sweep.size();
    std::vector<MetricsRow> rows(runs);
    run_pool(runs, config.workers, [&](std::size_t k) {
      const std::size_t g = k / config.sweep.size();
      const std::size_t s = k % config.sweep.size();
      MetricsRow& row = rows[k];
      row.groundtruth = truths[g].name;
      row.duration_h = c.duration_h;
      row.pointing = c.pointing;
      row.multiplier = config.sweep[s];
      char id[128];
      std::snprintf(id, sizeof id, "g%zu_h%s_p%llu_s%zu", g, format_number(c.duration_h).c_str(),
                    static_cast<unsigned long long>(c.pointing), s);
      row.run_id = id;
      const auto start = std::chrono::steady_clock::now();
      try {
        solvers::SolverConfig sc = config.solver_config;
        solvers::SolverReport report;
        const double tau = data[g].tau;
        if (airi) {
          row.heuristic = solvers::heuristic_sigma(tau, lipschitz);
          row.value_used = row.multiplier * row.heuristic;
          if (!(row.value_used > 0.0)) throw ValidationError("heuristic noise level is zero; use a finite iSNR");
          denoiser::DenoiserHandle handle{
              std::make_shared<denoiser::RescaledDenoiser>(model, trained_sigma, row.value_used),
              config.equivariant, config.seed};
          report = solvers::run_airi(op, data[g].values, handle, sc);
        } else {
          const auto h = solvers::heuristic_usara(tau, lipschitz, sc.correction);
          row.heuristic = h.gamma_lambda;
          row.value_used = row.multiplier * h.gamma_lambda;
          const double gamma = sc.gamma_factor / lipschitz;
          sc.lambda = row.value_used / gamma;
          sc.rho = solvers::heuristic_usara(tau, lipschitz, solvers::HeuristicCorrection::kOneThird).rho;
          if (!(sc.rho > 0.0)) throw ValidationError("heuristic floor is zero; use a finite iSNR");
          report = solvers::run_usara(op, data[g].values, sc);
        }
        row.snr_db = snr(report.image, truths[g].image);
        row.logsnr_db = logsnr(report.image, truths[g].image);
        row.iterations = report.iterations;
        row.status = solvers::to_string(report.status);
        row.gradient_s = report.timings.gradient_s;
        row.regularizer_s = report.timings.regularizer_s;
        if (config.write_images) {
          write_images(config.output / "runs" / row.run_id, report.image,
                       residual_image(op, data[g].values, report.image),
                       ri::dirty_image(op, data[g].values), config.png_saturation);
        }
      } catch (const std::exception& e) {
        row.snr_db = row.logsnr_db = std::nan("");
        row.status = std::string("failed: ") + e.what();
      }
      row.total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }

  for (double duration : config.coverage.csv ? std::vector<double>{0.0} : config.coverage.durations_h) {
    for (double mult : config.sweep) {
      std::vector<double> snrs, logsnrs;
      for (const MetricsRow& r : result.rows) {
        if (r.duration_h == duration && r.multiplier == mult && std::isfinite(r.snr_db)) {
          snrs.push_back(r.snr_db);
          logsnrs.push_back(r.logsnr_db);
        }
      }
      SweepSummary s;
      s.duration_h = duration;
      s.multiplier = mult;
      s.runs = snrs.size();
      std::tie(s.snr_mean, s.snr_ci95) = mean_ci95(snrs);
      std::tie(s.logsnr_mean, s.logsnr_ci95) = mean_ci95(logsnrs);
      result.summary.push_back(s);
    }
  }
  return result;
}

}  // namespace

solvers::SolverConfig solver_config_from_json(const json& j) {
  solvers::SolverConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ValidationError("solver_config must be an object");
  c.gamma_factor = value_or(j, "gamma_factor", c.gamma_factor);
  c.lambda = value_or(j, "lambda", c.lambda);
  c.rho = value_or(j, "rho", c.rho);
  c.K = value_or(j, "K", c.K);
  c.xi1 = value_or(j, "xi1", c.xi1);
  c.xi2 = value_or(j, "xi2", c.xi2);
  c.xi3 = value_or(j, "xi3", c.xi3);
  c.max_iterations = value_or(j, "max_iterations", c.max_iterations);
  c.prox_max_iter = value_or(j, "prox_max_iter", c.prox_max_iter);
  c.dict_depth = value_or(j, "dict_depth", c.dict_depth);
  const std::string corr = value_or<std::string>(j, "correction", "none");
  if (corr == "none") {
    c.correction = solvers::HeuristicCorrection::kNone;
  } else if (corr == "one_third") {
    c.correction = solvers::HeuristicCorrection::kOneThird;
  } else {
    throw ValidationError("correction must be 'none' or 'one_third'");
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
  ExperimentConfig c;
  const std::string mode = value_or<std::string>(j, "mode", "reconstruct");
  if (mode == "reconstruct") {
    c.mode = ExperimentMode::kReconstruct;
  } else if (mode == "heuristic") {
    c.mode = ExperimentMode::kHeuristic;
    c.lipschitz_tol = 1e-3;
  } else {
    throw ValidationError("mode must be 'reconstruct' or 'heuristic'");
  }
  for (const auto& p : value_or<std::vector<std::string>>(j, "groundtruths", {})) {
    c.groundtruths.push_back(resolve(base_dir, p));
  }
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    c.synthetic.count = value_or<std::size_t>(s, "count", 4);
    c.synthetic.size = value_or<std::size_t>(s, "size", 512);
    c.synthetic.seed = value_or<std::uint64_t>(s, "seed", 1);
  }
  if (c.groundtruths.empty() == (c.synthetic.count == 0)) {
    throw ValidationError("give exactly one of 'groundtruths' or 'synthetic'");
  }

  if (!j.contains("coverage")) throw ValidationError("config needs a 'coverage' section");
  const json& cov = j.at("coverage");
  const bool has_csv = cov.contains("csv");
  const bool has_tracks = cov.contains("hours") || cov.contains("antennas") || cov.contains("pointings");
  if (has_csv == has_tracks) {
    throw ValidationError("coverage needs exactly one source: 'csv' or generated tracks");
  }
  if (has_csv) {
    c.coverage.csv = resolve(base_dir, cov.at("csv").get<std::string>());
  } else {
    TrackOptions& t = c.coverage.tracks;
    t.n_antennas = value_or(cov, "antennas", t.n_antennas);
    t.rate_per_h = value_or(cov, "rate_per_h", t.rate_per_h);
    t.layout_seed = value_or(cov, "layout_seed", t.layout_seed);
    t.latitude_deg = value_or(cov, "latitude_deg", t.latitude_deg);
    t.wavelength_m = value_or(cov, "wavelength_m", t.wavelength_m);
    t.conjugate = value_or(cov, "conjugate", t.conjugate);
    if (cov.contains("declination_deg") && !cov.at("declination_deg").is_null()) {
      t.declination_deg = cov.at("declination_deg").get<double>();
    }
    if (cov.contains("layout_csv")) t.layout = load_layout_csv(resolve(base_dir, cov.at("layout_csv").get<std::string>()));
    if (cov.contains("hours")) {
      c.coverage.durations_h = cov.at("hours").is_array() ? cov.at("hours").get<std::vector<double>>()
                                                          : std::vector<double>{cov.at("hours").get<double>()};
    }
    c.coverage.pointings = value_or(cov, "pointings", c.coverage.pointings);
    if (c.coverage.durations_h.empty() || c.coverage.pointings.empty()) {
      throw ValidationError("coverage needs at least one duration and one pointing");
    }
  }

  c.isnr_db = value_or(j, "isnr_db", c.isnr_db);
  c.noise_seed = value_or(j, "noise_seed", c.noise_seed);
  c.solver = value_or<std::string>(j, "solver", c.solver);
  if (c.solver != "airi" && c.solver != "usara") throw ValidationError("solver must be 'airi' or 'usara'");
  c.solver_config = solver_config_from_json(j.contains("solver_config") ? j.at("solver_config") : json());
  if (j.contains("denoiser")) {
    const json& d = j.at("denoiser");
    if (d.is_string()) {
      c.denoiser.manifest = resolve(base_dir, d.get<std::string>());
    } else {
      if (d.contains("manifest")) c.denoiser.manifest = resolve(base_dir, d.at("manifest").get<std::string>());
      c.denoiser.toy = value_or<std::string>(d, "toy", "");
      c.denoiser.strength = value_or(d, "strength", c.denoiser.strength);
    }
  }
  c.equivariant = value_or(j, "equivariant", c.equivariant);
  c.seed = value_or(j, "seed", c.seed);
  c.sweep = value_or(j, "sweep", c.sweep);
  if (c.sweep.empty()) throw ValidationError("sweep needs at least one multiplier");
  for (double m : c.sweep) {
    if (!(m > 0.0)) throw ValidationError("sweep multipliers must be positive");
  }
  c.output = resolve(base_dir, value_or<std::string>(j, "output", c.output.string()));
  c.workers = value_or(j, "workers", c.workers);
  c.png_saturation = value_or(j, "png_saturation", c.png_saturation);
  c.write_images = value_or(j, "write_images", c.write_images);
  c.lipschitz_tol = value_or(j, "lipschitz_tol", c.lipschitz_tol);
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open experiment config " + path.string());
  try {
    return from_json(json::parse(in), path.parent_path());
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::pair<double, double> mean_ci95(const std::vector<double>& values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(values.size()))};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto truths = load_groundtruths(config);
  fs::create_directories(config.output);
  if (config.mode == ExperimentMode::kHeuristic) {
    auto result = run_heuristic(config, truths);
    write_heuristic_csvs(config.output, result);
    return result;
  }
  auto result = run_reconstruct(config, truths);
  write_reconstruction_csvs(config.output, result);
  return result;
}

}  // namespace airi::harness
