#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "airi/denoiser/denoiser.hpp"
#include "airi/image.hpp"
#include "airi/prox/prox.hpp"
#include "airi/ri/measurement.hpp"
#include "airi/sara/dictionary.hpp"

namespace airi::solvers {

enum class HeuristicCorrection { kNone, kOneThird };

struct SolverConfig {
  /// gamma = gamma_factor / L, in (0, 2)
  double gamma_factor = 1.98;
  /// uSARA regularization weight; the soft-threshold level is gamma * lambda.
  double lambda = 0.0;
  /// uSARA reweighting floor.
  double rho = 1.0;
  /// FB steps per reweighting block.
  int K = 5;
  double xi1 = 5e-6;
  double xi2 = 1e-5;
  double xi3 = 5e-6;
  /// Total FB iteration budget for either solver.
  int max_iterations = 6000;
  int prox_max_iter = 200;
  int dict_depth = 4;
  HeuristicCorrection correction = HeuristicCorrection::kNone;
  /// Starting image; defaults to the dirty image clipped to be nonnegative.
  std::optional<Image> initial;
  /// Record the uSARA objective with the current weights after every FB step.
  bool track_objective = false;
  /// Divergence detector: relative change above `divergence_factor` times its running
  /// minimum for `divergence_window` consecutive iterations, or an iterate norm beyond
  /// `blowup_factor` times the problem scale.
  int divergence_window = 50;
  double divergence_factor = 10.0;
  double blowup_factor = 1e6;
};

enum class SolverStatus { kConverged, kMaxIterations, kDiverged };
std::string to_string(SolverStatus status);

struct StepTimings {
  double gradient_s = 0.0;
  double regularizer_s = 0.0;
};

struct SolverReport {
  Image image;
  int iterations = 0;
  /// relative change ||x_{k+1} - x_k|| / ||x_{k+1}|| after every FB step
  std::vector<double> trace;
  /// uSARA only: relative change between consecutive reweighting outputs
  std::vector<double> outer_trace;
  /// uSARA only: dual iterations used by each prox call
  std::vector<int> prox_iterations;
  int unconverged_prox_calls = 0;
  std::vector<double> objective;
  StepTimings timings;
  SolverStatus status = SolverStatus::kMaxIterations;
  double gamma = 0.0;
  std::string diagnostic;

  bool converged() const { return status == SolverStatus::kConverged; }
};

struct IterationInfo {
  int iteration;
  double relative_change;
  const Image& image;
};
using IterationCallback = std::function<void(const IterationInfo&)>;

/// x - gamma * (Re{Phi^dagger Phi} x - Re{Phi^dagger y})
Image gradient_step(const ri::LinearMeasurement& op, const Image& x,
                    std::span<const std::complex<double>> y, double gamma);
/// Same step with the backprojected data precomputed.
Image gradient_step(const ri::LinearMeasurement& op, const Image& x, const Image& backprojected,
                    double gamma);

double heuristic_sigma(double tau, double lipschitz);

struct UsaraHeuristic {
  /// soft-threshold level gamma * lambda
  double gamma_lambda;
  double rho;
};
UsaraHeuristic heuristic_usara(double tau, double lipschitz, HeuristicCorrection correction);

/// 1/2 ||Phi x - y||^2 + lambda * ||W psi^T x||_1
double usara_objective(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                       const sara::Dictionary& psi, const Image& x, double lambda,
                       const prox::WeightMatrix& weights);

/// Reweighted forward-backward over a sparsity dictionary. L must be cached in op.
SolverReport run_usara(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                       const sara::Dictionary& psi, const SolverConfig& config,
                       const IterationCallback& callback = {});
/// Same with the nine-basis average-sparsity dictionary of depth config.dict_depth.
SolverReport run_usara(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                       const SolverConfig& config, const IterationCallback& callback = {});

/// Plug-and-play forward-backward: x <- D(x - gamma grad f(x)). L must be cached in op.
SolverReport run_airi(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                      const denoiser::DenoiserHandle& denoiser, const SolverConfig& config,
                      const IterationCallback& callback = {});

}  // namespace airi::solvers
