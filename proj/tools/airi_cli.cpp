#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "airi/dataset/dataset.hpp"
#include "airi/denoiser/jacobian.hpp"
#include "airi/denoiser/model_io.hpp"
#include "airi/denoiser/toy_models.hpp"
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
#include "airi/solvers/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace airi;

namespace {

/// Either a manifest path or a built-in toy name.
struct ModelChoice {
  std::string manifest;
  std::string toy;
  double strength = 0.5;
  double gain = 2.0;
  double sigma = 0.0;

  void add_options(CLI::App* app) {
    auto* m = app->add_option("--model", manifest, "Model manifest or directory");
    auto* t = app->add_option("--toy", toy, "Built-in toy model: smoothing, gain, zero")
                  ->check(CLI::IsMember({"smoothing", "gain", "zero"}));
    m->excludes(t);
    app->add_option("--strength", strength, "Smoothing toy strength");
    app->add_option("--gain", gain, "Gain toy factor");
    app->add_option("--toy-sigma", sigma, "Training noise level recorded in a toy model");
  }

  denoiser::ModelFile load() const {
    denoiser::ModelInfo info;
    info.sigma = sigma > 0.0 ? sigma : 1.0;
    if (!manifest.empty()) return denoiser::load_model(manifest);
    if (toy == "smoothing") return denoiser::smoothing_model(strength, 2, info);
    if (toy == "gain") return denoiser::gain_model(gain, 2, info);
    if (toy == "zero") return denoiser::zero_model(2, info);
    throw ValidationError("give --model or --toy");
  }
};

struct CoverageChoice {
  std::string uv_csv;
  harness::TrackOptions tracks;
  double declination = std::nan("");
  std::string layout_csv;

  void add_options(CLI::App* app) {
    app->add_option("--uv", uv_csv, "uv coverage CSV (u,v in wavelengths)");
    app->add_option("--antennas", tracks.n_antennas, "Number of antennas")->capture_default_str();
    app->add_option("--hours", tracks.delta_t_h, "Observation length in hours")->capture_default_str();
    app->add_option("--rate", tracks.rate_per_h, "Samples per hour")->capture_default_str();
    app->add_option("--pointing", tracks.pointing_seed, "Pointing seed")->capture_default_str();
    app->add_option("--declination", declination, "Declination in degrees (default: drawn from the pointing seed)");
    app->add_option("--layout-seed", tracks.layout_seed, "Antenna layout seed")->capture_default_str();
    app->add_option("--layout", layout_csv, "Antenna layout CSV (east,north in metres)");
    app->add_flag("--conjugate", tracks.conjugate, "Add the conjugate of every uv point");
  }

  ri::UVCoverage build() {
    if (!uv_csv.empty()) return ri::load_coverage_csv(uv_csv);
    if (!std::isnan(declination)) tracks.declination_deg = declination;
    if (!layout_csv.empty()) tracks.layout = harness::load_layout_csv(layout_csv);
    return harness::gen_uv_tracks(tracks);
  }
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

void write_render(const fs::path& path, const Image& x, bool log_scale, double saturation) {
  harness::write_png(path, x.rows(), x.cols(),
                     log_scale ? harness::rlog_levels(x, saturation) : harness::symmetric_levels(x));
}

json trace_summary(const solvers::SolverReport& r) {
  return {{"iterations", r.iterations},
          {"status", solvers::to_string(r.status)},
          {"final_relative_change", r.trace.empty() ? 0.0 : r.trace.back()},
          {"gamma", r.gamma},
          {"gradient_s", r.timings.gradient_s},
          {"regularizer_s", r.timings.regularizer_s},
          {"diagnostic", r.diagnostic}};
}

int run(int argc, char** argv) {
  CLI::App app{"AIRI and uSARA radio-interferometric imaging"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a coverage and noisy visibilities from a sky");
  std::string sim_truth, sim_out = "observation";
  std::size_t sim_size = 256;
  std::uint64_t sim_sky_seed = 1, sim_noise_seed = 0;
  double sim_isnr = 30.0;
  CoverageChoice sim_cov;
  sim->add_option("--groundtruth", sim_truth, "Groundtruth image (.img); default is a synthetic sky");
  sim->add_option("--size", sim_size, "Synthetic sky size")->capture_default_str();
  sim->add_option("--sky-seed", sim_sky_seed, "Synthetic sky seed")->capture_default_str();
  sim->add_option("--isnr", sim_isnr, "Input SNR in dB")->capture_default_str();
  sim->add_option("--noise-seed", sim_noise_seed, "Noise seed")->capture_default_str();
  sim->add_option("-o,--out", sim_out, "Output directory")->capture_default_str();
  sim_cov.add_options(sim);

  // solve
  auto* solve = app.add_subcommand("solve", "Reconstruct an image from an observation");
  std::string solve_algo, solve_obs, solve_out = "reconstruction", solve_config, solve_truth;
  double solve_mult = 1.0;
  bool solve_equivariant = false, solve_one_third = false;
  std::uint64_t solve_seed = 0;
  int solve_max_iter = 0;
  ModelChoice solve_model;
  solve->add_option("algorithm", solve_algo, "usara or airi")->required()->check(CLI::IsMember({"usara", "airi"}));
  solve->add_option("--obs", solve_obs, "Observation directory written by simulate")->required();
  solve->add_option("-o,--out", solve_out, "Output directory")->capture_default_str();
  solve->add_option("--config", solve_config, "Solver settings JSON");
  solve->add_option("--multiplier", solve_mult, "Multiplier of the heuristic sigma or gamma*lambda")
      ->capture_default_str();
  solve->add_option("--max-iter", solve_max_iter, "Iteration budget");
  solve->add_flag("--equivariant", solve_equivariant, "Random flip/rotation around each denoiser call");
  solve->add_flag("--one-third", solve_one_third, "Apply the 1/3 correction to the uSARA heuristic");
  solve->add_option("--seed", solve_seed, "Seed for the equivariant draws");
  solve->add_option("--groundtruth", solve_truth, "Report SNR against this image");
  solve_model.add_options(solve);

  // denoise
  auto* den = app.add_subcommand("denoise", "Apply the denoiser once");
  std::string den_in, den_out;
  double den_target = 0.0;
  bool den_equivariant = false;
  std::uint64_t den_seed = 0;
  ModelChoice den_model;
  den->add_option("input", den_in, "Input image (.img)")->required();
  den->add_option("output", den_out, "Output image (.img)")->required();
  den->add_option("--sigma", den_target, "Run at this noise level by rescaling");
  den->add_flag("--equivariant", den_equivariant, "Random flip/rotation around the call");
  den->add_option("--seed", den_seed, "Seed for the equivariant draw");
  den_model.add_options(den);

  // dataset
  auto* ds = app.add_subcommand("dataset", "Training database construction");
  ds->require_subcommand(1);
  auto* ds_pre = ds->add_subcommand("preprocess", "Denoise a raw image into a low-dynamic-range one");
  std::string pre_in, pre_out;
  double pre_sigma = 0.0;
  std::vector<std::size_t> pre_box;
  ds_pre->add_option("input", pre_in, "Raw image (.img)")->required();
  ds_pre->add_option("output", pre_out, "Output image (.img)")->required();
  ds_pre->add_option("--sigma-hat", pre_sigma, "Background noise level (default: estimated)");
  ds_pre->add_option("--box", pre_box, "Background box: row col height width")->expected(4);
  auto* ds_corpus = ds->add_subcommand("corpus", "Preprocess every raw/*.img of a corpus directory");
  std::string corpus_dir;
  ds_corpus->add_option("dir", corpus_dir, "Corpus directory")->required();
  auto* ds_tiles = ds->add_subcommand("tiles", "Pad and cut an image into square tiles");
  std::string tiles_in, tiles_out;
  std::size_t tile = dataset::kDefaultTile;
  ds_tiles->add_option("input", tiles_in, "Image (.img)")->required();
  ds_tiles->add_option("out_dir", tiles_out, "Output directory")->required();
  ds_tiles->add_option("--tile", tile, "Tile size")->capture_default_str();
  auto* ds_pairs = ds->add_subcommand("pairs", "Exponentiate and add noise, optionally cutting patches");
  std::string pairs_in, pairs_out;
  double pairs_sigma = 1e-4, pairs_floor = dataset::kDefaultFloor;
  std::uint64_t pairs_seed = 0;
  dataset::PatchOptions patch;
  ds_pairs->add_option("input", pairs_in, "Low-dynamic-range image (.img)")->required();
  ds_pairs->add_option("out_dir", pairs_out, "Output directory")->required();
  ds_pairs->add_option("--sigma", pairs_sigma, "Noise level")->capture_default_str();
  ds_pairs->add_option("--floor", pairs_floor, "Nominal floor of the input")->capture_default_str();
  ds_pairs->add_option("--seed", pairs_seed, "Noise seed")->capture_default_str();
  ds_pairs->add_option("--patches", patch.count, "Number of patches to cut from the pair (0: whole image)");
  ds_pairs->add_option("--patch-size", patch.size, "Patch side")->capture_default_str();
  ds_pairs->add_flag("--augment", patch.augment, "Random zoom, flips and rotations");

  // metrics
  auto* met = app.add_subcommand("metrics", "SNR and logSNR of an estimate, optionally its residual");
  std::string met_est, met_truth, met_obs, met_residual;
  met->add_option("estimate", met_est, "Estimated image (.img)")->required();
  met->add_option("groundtruth", met_truth, "Groundtruth image (.img)")->required();
  met->add_option("--obs", met_obs, "Observation directory for the residual image");
  met->add_option("--residual", met_residual, "Where to write the residual image (.img)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a JSON-configured experiment grid");
  std::string exp_config;
  exp->add_option("config", exp_config, "Experiment JSON")->required();

  // certify
  auto* cert = app.add_subcommand("certify", "Jacobian-norm sweep of a denoiser between noisy and clean images");
  std::vector<std::string> cert_images;
  double cert_sigma = 0.0;
  std::uint64_t cert_seed = 0;
  denoiser::CertifyOptions cert_opts;
  ModelChoice cert_model;
  cert->add_option("images", cert_images, "Clean images (.img)")->required();
  cert->add_option("--sigma", cert_sigma, "Noise level of the noisy inputs (default: the model's)");
  cert->add_option("--iters", cert_opts.power_iters, "Power iterations")->capture_default_str();
  cert->add_option("--points", cert_opts.points_per_pair, "Evaluation points per image")->capture_default_str();
  cert->add_option("--margin", cert_opts.margin, "Allowed excess over 1")->capture_default_str();
  cert->add_option("--seed", cert_seed, "Noise and sampling seed")->capture_default_str();
  cert_model.add_options(cert);

  // export-toy
  auto* toy = app.add_subcommand("export-toy", "Write a hand-built model in the manifest format");
  std::string toy_out;
  std::size_t toy_refs = 0, toy_ref_size = 16;
  ModelChoice toy_model;
  toy->add_option("out_dir", toy_out, "Model directory")->required();
  toy->add_option("--reference", toy_refs, "Also write this many reference vectors");
  toy->add_option("--reference-size", toy_ref_size, "Side of the reference inputs")->capture_default_str();
  toy_model.add_options(toy);

  // verify-reference
  auto* ver = app.add_subcommand("verify-reference", "Compare a model against stored reference vectors");
  std::string ver_ref;
  double ver_tol = 1e-5;
  ModelChoice ver_model;
  ver->add_option("reference", ver_ref, "reference.json")->required();
  ver->add_option("--tol", ver_tol, "Maximum absolute error")->capture_default_str();
  ver_model.add_options(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*sim) {
    const Image truth = sim_truth.empty() ? harness::synthetic_sky(sim_size, sim_size, sim_sky_seed)
                                          : load_image(sim_truth);
    harness::Observation obs;
    obs.coverage = sim_cov.build();
    obs.rows = truth.rows();
    obs.cols = truth.cols();
    auto op = ri::build_operator(obs.coverage, obs.rows, obs.cols);
    auto data = ri::simulate_visibilities(op, truth, sim_isnr, sim_noise_seed);
    obs.visibilities = std::move(data.values);
    obs.tau = data.tau;
    harness::save_observation(obs, sim_out);
    save_image(truth, fs::path(sim_out) / "groundtruth.img");
    const Image dirty = ri::dirty_image(op, obs.visibilities);
    save_image(dirty, fs::path(sim_out) / "dirty.img");
    write_render(fs::path(sim_out) / "dirty.png", dirty, false, 0.0);
    write_render(fs::path(sim_out) / "groundtruth.png", truth, true, 1.0);
    print_json({{"measurements", obs.visibilities.size()}, {"tau", obs.tau}, {"cell_size", obs.coverage.cell_size}});
    return 0;
  }

  if (*solve) {
    const auto obs = harness::load_observation(solve_obs);
    auto op = ri::build_operator(obs.coverage, obs.rows, obs.cols);
    ri::spectral_norm(op, 1e-6, 5000);
    const double lipschitz = *op.lipschitz();
    solvers::SolverConfig sc;
    if (!solve_config.empty()) {
      std::ifstream in(solve_config);
      if (!in) throw ValidationError("cannot open " + solve_config);
      sc = harness::solver_config_from_json(json::parse(in));
    }
    if (solve_max_iter > 0) sc.max_iterations = solve_max_iter;
    if (!(solve_mult > 0.0)) throw ValidationError("--multiplier must be positive");
    if (!(obs.tau > 0.0)) throw ValidationError("observation has tau = 0; the heuristics need a noise level");
    solvers::SolverReport report;
    json info = {{"lipschitz", lipschitz}, {"tau", obs.tau}, {"multiplier", solve_mult}};
    if (solve_algo == "airi") {
      const auto model = solve_model.load();
      const double sigma = solve_mult * solvers::heuristic_sigma(obs.tau, lipschitz);
      info["sigma"] = sigma;
      info["trained_sigma"] = model.info.sigma;
      denoiser::DenoiserHandle handle{
          std::make_shared<denoiser::RescaledDenoiser>(denoiser::make_denoiser(model), model.info.sigma, sigma),
          solve_equivariant, solve_seed};
      report = solvers::run_airi(op, obs.visibilities, handle, sc);
    } else {
      const auto correction =
          solve_one_third ? solvers::HeuristicCorrection::kOneThird : sc.correction;
      const auto h = solvers::heuristic_usara(obs.tau, lipschitz, correction);
      sc.lambda = solve_mult * h.gamma_lambda * lipschitz / sc.gamma_factor;
      sc.rho = solvers::heuristic_usara(obs.tau, lipschitz, solvers::HeuristicCorrection::kOneThird).rho;
      info["gamma_lambda"] = solve_mult * h.gamma_lambda;
      report = solvers::run_usara(op, obs.visibilities, sc);
    }
    fs::create_directories(solve_out);
    const Image residual = harness::residual_image(op, obs.visibilities, report.image);
    save_image(report.image, fs::path(solve_out) / "model.img");
    save_image(residual, fs::path(solve_out) / "residual.img");
    write_render(fs::path(solve_out) / "model.png", report.image, true, 1.0);
    write_render(fs::path(solve_out) / "residual.png", residual, false, 0.0);
    info["report"] = trace_summary(report);
    if (!solve_truth.empty()) {
      const Image truth = load_image(solve_truth);
      info["snr_db"] = harness::snr(report.image, truth);
      info["logsnr_db"] = harness::logsnr(report.image, truth);
    }
    std::ofstream(fs::path(solve_out) / "report.json") << info.dump(2) << '\n';
    print_json(info);
    return report.status == solvers::SolverStatus::kDiverged ? 3 : 0;
  }

  if (*den) {
    const auto model = den_model.load();
    std::shared_ptr<const denoiser::Denoiser> d = denoiser::make_denoiser(model);
    if (den_target > 0.0) d = std::make_shared<denoiser::RescaledDenoiser>(d, model.info.sigma, den_target);
    denoiser::DenoiserHandle handle{d, den_equivariant, den_seed};
    const Image x = load_image(den_in);
    Image out;
    if (den_equivariant) {
      std::mt19937_64 rng(den_seed);
      out = denoiser::apply_equivariant(handle, x, rng);
    } else {
      out = denoiser::apply(handle, x);
    }
    save_image(out, den_out);
    return 0;
  }

  if (*ds_pre) {
    dataset::LowDRImage raw{dataset::normalize_peak(load_image(pre_in)), dataset::kDefaultFloor};
    std::optional<dataset::Box> box;
    if (pre_box.size() == 4) box = dataset::Box{pre_box[0], pre_box[1], pre_box[2], pre_box[3]};
    const double sigma_hat = pre_sigma > 0.0 ? pre_sigma : dataset::estimate_background_sigma(raw.pixels, box);
    const auto result = dataset::preprocess_raw(raw, sigma_hat);
    save_image(result.image.pixels, pre_out);
    print_json({{"sigma_hat", sigma_hat}, {"report", trace_summary(result.report)}});
    return 0;
  }
  if (*ds_corpus) {
    const auto entries = dataset::build_corpus(corpus_dir);
    json list = json::array();
    for (const auto& e : entries) list.push_back({{"filename", e.filename}, {"sigma_hat", e.sigma_hat}});
    print_json(list);
    return 0;
  }
  if (*ds_tiles) {
    const auto tiles = dataset::split_tiles({load_image(tiles_in), dataset::kDefaultFloor}, tile);
    fs::create_directories(tiles_out);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "tile_%03zu.img", i);
      save_image(tiles[i].pixels, fs::path(tiles_out) / name);
    }
    print_json({{"tiles", tiles.size()}});
    return 0;
  }
  if (*ds_pairs) {
    const Image low = load_image(pairs_in);
    dataset::require_low_dynamic_range(low, pairs_in);
    const double a = dataset::solve_exponentiation(pairs_sigma, pairs_floor);
    const auto pair = dataset::make_pair(low, a, pairs_sigma, pairs_seed);
    fs::create_directories(pairs_out);
    const fs::path out(pairs_out);
    if (patch.count == 0) {
      save_image(pair.groundtruth, out / "groundtruth.img");
      save_image(pair.noisy, out / "noisy.img");
    } else {
      // Same seed and same image size give the same windows for both images.
      patch.seed = pairs_seed;
      const auto clean = dataset::extract_patches(pair.groundtruth, patch);
      const auto noisy = dataset::extract_patches(pair.noisy, patch);
      for (std::size_t i = 0; i < clean.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "patch_%05zu_clean.img", i);
        save_image(clean[i], out / name);
        std::snprintf(name, sizeof name, "patch_%05zu_noisy.img", i);
        save_image(noisy[i], out / name);
      }
    }
    print_json({{"a", a}, {"sigma", pairs_sigma}, {"seed", pairs_seed}});
    return 0;
  }

  if (*met) {
    const Image est = load_image(met_est);
    const Image truth = load_image(met_truth);
    json out = {{"snr_db", harness::snr(est, truth)}, {"logsnr_db", harness::logsnr(est, truth)}};
    if (!met_obs.empty()) {
      const auto obs = harness::load_observation(met_obs);
      auto op = ri::build_operator(obs.coverage, obs.rows, obs.cols);
      const Image residual = harness::residual_image(op, obs.visibilities, est);
      out["residual_std"] = std::sqrt(dot(residual, residual) / static_cast<double>(residual.size()));
      if (!met_residual.empty()) save_image(residual, met_residual);
    }
    print_json(out);
    return 0;
  }

  if (*exp) {
    const auto config = harness::ExperimentConfig::load(exp_config);
    const auto result = harness::run_experiment(config);
    std::size_t failed = 0;
    for (const auto& r : result.rows) failed += r.status.rfind("failed", 0) == 0;
    print_json({{"output", config.output.string()}, {"runs", result.rows.size()}, {"failed", failed},
                {"heuristic_rows", result.heuristics.size()}});
    return 0;
  }

  if (*cert) {
    const auto model = cert_model.load();
    const auto d = denoiser::make_denoiser(model);
    const double sigma = cert_sigma > 0.0 ? cert_sigma : model.info.sigma;
    std::mt19937_64 rng(cert_seed);
    std::normal_distribution<double> normal;
    std::vector<std::pair<Image, Image>> pairs;
    for (const auto& path : cert_images) {
      const Image clean = load_image(path);
      Image noisy = clean;
      for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += sigma * normal(rng);
      pairs.emplace_back(std::move(noisy), clean);
    }
    cert_opts.seed = cert_seed;
    const auto report = denoiser::certify(*d, pairs, cert_opts);
    print_json({{"max", report.max}, {"mean", report.mean}, {"norms", report.norms},
                {"kinks", report.kinks}, {"margin", report.margin}, {"passed", report.passed}});
    return report.passed ? 0 : 1;
  }

  if (*toy) {
    const auto model = toy_model.load();
    const auto manifest = denoiser::save_model(model, toy_out);
    json out = {{"manifest", manifest.string()}};
    if (toy_refs > 0) {
      std::mt19937_64 rng(7);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<Image> inputs;
      for (std::size_t k = 0; k < toy_refs; ++k) {
        Image x(toy_ref_size, toy_ref_size);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);
        inputs.push_back(std::move(x));
      }
      const auto ref = denoiser::make_reference_vectors(*denoiser::make_denoiser(model), inputs);
      denoiser::save_reference_vectors(ref, fs::path(toy_out) / "reference.json");
      out["reference"] = (fs::path(toy_out) / "reference.json").string();
    }
    print_json(out);
    return 0;
  }

  if (*ver) {
    const auto model = ver_model.load();
    const auto ref = denoiser::load_reference_vectors(ver_ref);
    const double err = denoiser::reference_max_error(*denoiser::make_denoiser(model), ref);
    print_json({{"max_error", err}, {"tolerance", ver_tol}, {"passed", err <= ver_tol}});
    return err <= ver_tol ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
