#include "airi/solvers/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "airi/errors.hpp"
#include "airi/ri/imaging.hpp"
#include "airi/sara/sara_dictionary.hpp"

namespace airi::solvers {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate(const SolverConfig& c) {
  if (!(c.gamma_factor > 0.0 && c.gamma_factor < 2.0)) {
    throw ValidationError("gamma_factor must lie in (0, 2)");
  }
  if (!(c.xi1 > 0.0) || !(c.xi2 > 0.0) || !(c.xi3 > 0.0)) {
    throw ValidationError("stopping tolerances must be positive");
  }
  if (c.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (c.K < 1) throw ValidationError("K must be >= 1");
  if (c.prox_max_iter < 1) throw ValidationError("prox_max_iter must be >= 1");
  if (c.divergence_window < 1) throw ValidationError("divergence_window must be >= 1");
}

double step_size(const ri::LinearMeasurement& op, const SolverConfig& c) {
  const auto L = op.lipschitz();
  if (!L) throw ValidationError("operator spectral norm is not computed; run spectral_norm first");
  if (!(*L > 0.0)) throw NumericalError("operator spectral norm is not positive");
  return c.gamma_factor / *L;
}

Image starting_point(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                     const SolverConfig& c) {
  if (c.initial) {
    if (c.initial->rows() != op.image_rows() || c.initial->cols() != op.image_cols()) {
      throw ValidationError("initial image shape does not match the operator");
    }
    return *c.initial;
  }
  return prox::project_positive(ri::dirty_image(op, y));
}

void require_finite(const Image& x, int iteration, const char* what) {
  if (!x.all_finite()) {
    throw NumericalError(std::string(what) + " produced a non-finite iterate at iteration " +
                         std::to_string(iteration));
  }
}

/// Flags sustained growth of the relative change or of the iterate itself.
class DivergenceMonitor {
 public:
  DivergenceMonitor(const SolverConfig& c, double scale)
      : window_(c.divergence_window), factor_(c.divergence_factor),
        limit_(c.blowup_factor * std::max(scale, std::numeric_limits<double>::min())) {}

  /// Returns a diagnostic when the run should be declared divergent.
  std::optional<std::string> update(double rel, const Image& x) {
    const double size = norm(x);
    if (size > limit_) {
      return "iterate norm " + std::to_string(size) + " exceeds " + std::to_string(limit_);
    }
    if (std::isfinite(rel)) running_min_ = std::min(running_min_, rel);
    if (rel > factor_ * running_min_) {
      if (++streak_ >= window_) {
        return "relative change stayed above " + std::to_string(factor_) +
               "x its running minimum for " + std::to_string(window_) + " iterations";
      }
    } else {
      streak_ = 0;
    }
    return std::nullopt;
  }

 private:
  int window_;
  double factor_;
  double limit_;
  double running_min_ = std::numeric_limits<double>::infinity();
  int streak_ = 0;
};

}  // namespace

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged: return "converged";
    case SolverStatus::kMaxIterations: return "max_iterations";
    case SolverStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

Image gradient_step(const ri::LinearMeasurement& op, const Image& x, const Image& backprojected,
                    double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("gradient step size must be positive");
  require_same_shape(x, backprojected, "gradient step");
  Image out = op.normal(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - gamma * (out[i] - backprojected[i]);
  return out;
}

Image gradient_step(const ri::LinearMeasurement& op, const Image& x,
                    std::span<const std::complex<double>> y, double gamma) {
  return gradient_step(op, x, op.adjoint(y), gamma);
}

double heuristic_sigma(double tau, double lipschitz) {
  if (!(lipschitz > 0.0)) throw ValidationError("Lipschitz constant must be positive");
  if (!(tau >= 0.0)) throw ValidationError("noise level must be nonnegative");
  return tau / std::sqrt(2.0 * lipschitz);
}

UsaraHeuristic heuristic_usara(double tau, double lipschitz, HeuristicCorrection correction) {
  double value = heuristic_sigma(tau, lipschitz);
  if (correction == HeuristicCorrection::kOneThird) value /= 3.0;
  return {value, value};
}

double usara_objective(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                       const sara::Dictionary& psi, const Image& x, double lambda,
                       const prox::WeightMatrix& weights) {
  const auto fx = op.forward(x);
  if (fx.size() != y.size()) throw ValidationError("objective: data length mismatch");
  double misfit = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) misfit += std::norm(fx[i] - y[i]);
  return 0.5 * misfit + lambda * prox::weighted_l1(psi, x, weights);
}

SolverReport run_usara(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                       const sara::Dictionary& psi, const SolverConfig& config,
                       const IterationCallback& callback) {
  validate(config);
  if (!(config.lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  if (!(config.rho > 0.0)) throw ValidationError("rho must be positive");
  if (psi.rows() != op.image_rows() || psi.cols() != op.image_cols()) {
    throw ValidationError("dictionary shape does not match the operator");
  }
  SolverReport report;
  const double gamma = step_size(op, config);
  report.gamma = gamma;
  const double threshold = gamma * config.lambda;
  const Image backprojected = op.adjoint(y);
  Image x = starting_point(op, y, config);

  prox::WeightMatrix weights = prox::WeightMatrix::identity(psi.coefficient_count());
  prox::DualState dual;
  const prox::DualProxOptions prox_options{config.xi2, config.prox_max_iter};

  Image block_start = x;
  while (report.iterations < config.max_iterations) {
    for (int k = 0; k < config.K && report.iterations < config.max_iterations; ++k) {
      auto t0 = Clock::now();
      const Image z = gradient_step(op, x, backprojected, gamma);
      report.timings.gradient_s += seconds_since(t0);
      t0 = Clock::now();
      auto prox_out = prox::prox_weighted_l1(psi, z, threshold, weights, dual, prox_options);
      report.timings.regularizer_s += seconds_since(t0);
      report.prox_iterations.push_back(prox_out.iterations);
      if (!prox_out.converged) ++report.unconverged_prox_calls;
      require_finite(prox_out.image, report.iterations, "uSARA");
      const double rel = relative_change(prox_out.image, x);
      x = std::move(prox_out.image);
      ++report.iterations;
      report.trace.push_back(rel);
      if (config.track_objective) {
        report.objective.push_back(usara_objective(op, y, psi, x, config.lambda, weights));
      }
      if (callback) callback({report.iterations, rel, x});
    }
    const double outer_rel = relative_change(x, block_start);
    report.outer_trace.push_back(outer_rel);
    if (outer_rel < config.xi1) {
      report.status = SolverStatus::kConverged;
      break;
    }
    block_start = x;
    weights = prox::update_weights(psi, x, config.rho);
  }
  if (report.unconverged_prox_calls > 0) {
    report.diagnostic = std::to_string(report.unconverged_prox_calls) +
                        " prox calls stopped at the dual iteration cap";
  }
  report.image = std::move(x);
  return report;
}

SolverReport run_usara(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                       const SolverConfig& config, const IterationCallback& callback) {
  const sara::SaraDictionary psi(op.image_rows(), op.image_cols(), config.dict_depth);
  return run_usara(op, y, psi, config, callback);
}

SolverReport run_airi(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                      const denoiser::DenoiserHandle& denoiser, const SolverConfig& config,
                      const IterationCallback& callback) {
  validate(config);
  if (!denoiser.model) throw ValidationError("AIRI needs a denoiser");
  SolverReport report;
  const double gamma = step_size(op, config);
  report.gamma = gamma;
  const Image backprojected = op.adjoint(y);
  Image x = starting_point(op, y, config);
  std::mt19937_64 rng(denoiser.seed);
  DivergenceMonitor monitor(config, std::max(norm(x), gamma * norm(backprojected)));

  while (report.iterations < config.max_iterations) {
    auto t0 = Clock::now();
    const Image z = gradient_step(op, x, backprojected, gamma);
    report.timings.gradient_s += seconds_since(t0);
    t0 = Clock::now();
    Image next = denoiser.equivariant ? denoiser::apply_equivariant(denoiser, z, rng)
                                      : denoiser::apply(denoiser, z);
    report.timings.regularizer_s += seconds_since(t0);
    require_finite(next, report.iterations, "denoiser");
    const double rel = relative_change(next, x);
    x = std::move(next);
    ++report.iterations;
    report.trace.push_back(rel);
    if (callback) callback({report.iterations, rel, x});
    if (rel < config.xi3) {
      report.status = SolverStatus::kConverged;
      break;
    }
    if (auto why = monitor.update(rel, x)) {
      report.status = SolverStatus::kDiverged;
      report.diagnostic = *why;
      break;
    }
  }
  report.image = std::move(x);
  return report;
}

}  // namespace airi::solvers
