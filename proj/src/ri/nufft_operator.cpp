#include "airi/ri/nufft_operator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "airi/errors.hpp"

namespace airi::ri {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using GridBuffer = std::unique_ptr<std::complex<double>[], FftwFree>;

GridBuffer allocate_grid(std::size_t n) {
  auto* raw = static_cast<std::complex<double>*>(fftw_malloc(n * sizeof(std::complex<double>)));
  if (raw == nullptr) throw NumericalError("FFT buffer allocation failed");
  std::fill(raw, raw + n, std::complex<double>{});
  return GridBuffer(raw);
}

std::size_t wrap(std::int64_t k, std::size_t n) {
  const auto m = static_cast<std::int64_t>(n);
  const std::int64_t r = k % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

std::size_t oversampled_size(std::size_t n, double factor) {
  auto k = static_cast<std::size_t>(std::ceil(factor * static_cast<double>(n) - 1e-9));
  if (k % 2 != 0) ++k;
  return std::max(k, n);
}

}  // namespace

struct NufftOperator::FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  FftPlans(std::size_t rows, std::size_t cols) {
    std::lock_guard lock(planner_mutex());
    auto scratch = allocate_grid(rows * cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.get());
    forward = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                               FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward == nullptr || backward == nullptr) throw NumericalError("FFTW planning failed");
  }
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

NufftOperator::NufftOperator(const UVCoverage& coverage, std::size_t rows, std::size_t cols,
                             const NufftOptions& options)
    : rows_(rows),
      cols_(cols),
      kernel_(options.kernel.support,
              options.kernel.beta > 0.0
                  ? options.kernel.beta
                  : KaiserBessel::default_beta(options.kernel.support,
                                               std::max(options.oversampling, 1.0))) {
  if (rows == 0 || cols == 0 || rows % 2 != 0 || cols % 2 != 0) {
    throw ValidationError("image dimensions must be even and positive, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!(options.oversampling >= 1.0)) throw ValidationError("oversampling must be >= 1");
  if (!(coverage.cell_size > 0.0)) throw ValidationError("cell size must be positive");
  if (coverage.count() == 0) throw ValidationError("coverage has no points");
  if (coverage.count() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("coverage too large");
  }

  grid_rows_ = oversampled_size(rows, options.oversampling);
  grid_cols_ = oversampled_size(cols, options.oversampling);
  const int J = kernel_.support();
  if (static_cast<std::size_t>(J) > std::min(grid_rows_, grid_cols_)) {
    throw ValidationError("kernel support exceeds the oversampled grid");
  }

  count_ = coverage.count();
  const double half_band = coverage.band_half_width();
  const double tol = half_band * 1e-12;
  std::vector<double> t_row(count_), t_col(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    const auto& p = coverage.points[i];
    if (!std::isfinite(p.u) || !std::isfinite(p.v) || std::abs(p.u) > half_band + tol ||
        std::abs(p.v) > half_band + tol) {
      throw ValidationError("uv point " + std::to_string(i) + " lies outside the imaging band");
    }
    // Grid coordinate t = K * omega / (2 pi) = K * u * cell_size.
    t_row[i] = static_cast<double>(grid_rows_) * p.v * coverage.cell_size;
    t_col[i] = static_cast<double>(grid_cols_) * p.u * coverage.cell_size;
  }

  std::vector<std::uint32_t> order(count_);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::tie(t_row[a], t_col[a]) < std::tie(t_row[b], t_col[b]);
  });

  original_index_ = order;
  row_base_.resize(count_);
  col_base_.resize(count_);
  row_weights_.resize(count_ * J);
  col_weights_.resize(count_ * J);
  const double half = 0.5 * J;
  for (std::size_t r = 0; r < count_; ++r) {
    const std::uint32_t i = order[r];
    const auto rb = static_cast<std::int64_t>(std::floor(t_row[i] - half)) + 1;
    const auto cb = static_cast<std::int64_t>(std::floor(t_col[i] - half)) + 1;
    row_base_[r] = rb;
    col_base_[r] = cb;
    for (int a = 0; a < J; ++a) {
      row_weights_[r * J + a] = kernel_(t_row[i] - static_cast<double>(rb + a));
      col_weights_[r * J + a] = kernel_(t_col[i] - static_cast<double>(cb + a));
    }
  }
  visibility_weights_.assign(count_, 1.0);

  correction_rows_.resize(rows_);
  correction_cols_.resize(cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double c = static_cast<double>(r) - static_cast<double>(rows_ / 2);
    correction_rows_[r] = 1.0 / kernel_.transform(c / static_cast<double>(grid_rows_));
  }
  for (std::size_t c = 0; c < cols_; ++c) {
    const double x = static_cast<double>(c) - static_cast<double>(cols_ / 2);
    correction_cols_[c] = 1.0 / kernel_.transform(x / static_cast<double>(grid_cols_));
  }
  plans_ = std::make_shared<const FftPlans>(grid_rows_, grid_cols_);
}

Visibilities NufftOperator::forward(const Image& x) const {
  check_image(x);
  auto grid = allocate_grid(grid_rows_ * grid_cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t gr = wrap(static_cast<std::int64_t>(r) - static_cast<std::int64_t>(rows_ / 2),
                                grid_rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
      const std::size_t gc = wrap(
          static_cast<std::int64_t>(c) - static_cast<std::int64_t>(cols_ / 2), grid_cols_);
      grid[gr * grid_cols_ + gc] = x(r, c) * correction_rows_[r] * correction_cols_[c];
    }
  }
  auto* buf = reinterpret_cast<fftw_complex*>(grid.get());
  fftw_execute_dft(plans_->forward, buf, buf);

  const int J = kernel_.support();
  std::vector<std::size_t> rows_idx(J), cols_idx(J);
  Visibilities y(count_);
  for (std::size_t r = 0; r < count_; ++r) {
    for (int a = 0; a < J; ++a) {
      rows_idx[a] = wrap(row_base_[r] + a, grid_rows_) * grid_cols_;
      cols_idx[a] = wrap(col_base_[r] + a, grid_cols_);
    }
    const double* wr = &row_weights_[r * J];
    const double* wc = &col_weights_[r * J];
    std::complex<double> acc{};
    for (int a = 0; a < J; ++a) {
      const std::complex<double>* line = grid.get() + rows_idx[a];
      std::complex<double> partial{};
      for (int b = 0; b < J; ++b) partial += wc[b] * line[cols_idx[b]];
      acc += wr[a] * partial;
    }
    const std::uint32_t i = original_index_[r];
    y[i] = visibility_weights_[i] * acc;
  }
  return y;
}

Image NufftOperator::adjoint(std::span<const std::complex<double>> y) const {
  check_data(y);
  auto grid = allocate_grid(grid_rows_ * grid_cols_);
  const int J = kernel_.support();
  std::vector<std::size_t> rows_idx(J), cols_idx(J);
  for (std::size_t r = 0; r < count_; ++r) {
    const std::uint32_t i = original_index_[r];
    const std::complex<double> value = visibility_weights_[i] * y[i];
    if (value == std::complex<double>{}) continue;
    for (int a = 0; a < J; ++a) {
      rows_idx[a] = wrap(row_base_[r] + a, grid_rows_) * grid_cols_;
      cols_idx[a] = wrap(col_base_[r] + a, grid_cols_);
    }
    const double* wr = &row_weights_[r * J];
    const double* wc = &col_weights_[r * J];
    for (int a = 0; a < J; ++a) {
      std::complex<double>* line = grid.get() + rows_idx[a];
      const std::complex<double> scaled = wr[a] * value;
      for (int b = 0; b < J; ++b) line[cols_idx[b]] += wc[b] * scaled;
    }
  }
  auto* buf = reinterpret_cast<fftw_complex*>(grid.get());
  fftw_execute_dft(plans_->backward, buf, buf);
  return crop_and_correct(grid.get());
}

Image NufftOperator::crop_and_correct(const std::complex<double>* grid) const {
  Image out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t gr = wrap(static_cast<std::int64_t>(r) - static_cast<std::int64_t>(rows_ / 2),
                                grid_rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
      const std::size_t gc = wrap(
          static_cast<std::int64_t>(c) - static_cast<std::int64_t>(cols_ / 2), grid_cols_);
      out(r, c) = grid[gr * grid_cols_ + gc].real() * correction_rows_[r] * correction_cols_[c];
    }
  }
  return out;
}

GridFootprint NufftOperator::footprint(std::size_t i) const {
  if (i >= count_) throw ValidationError("footprint index out of range");
  const auto it = std::find(original_index_.begin(), original_index_.end(),
                            static_cast<std::uint32_t>(i));
  const auto r = static_cast<std::size_t>(it - original_index_.begin());
  const auto J = static_cast<std::size_t>(kernel_.support());
  return {row_base_[r], col_base_[r], std::span<const double>(&row_weights_[r * J], J),
          std::span<const double>(&col_weights_[r * J], J), visibility_weights_[i]};
}

NufftOperator NufftOperator::with_visibility_weights(std::vector<double> weights) const {
  if (weights.size() != count_) {
    throw ValidationError("expected " + std::to_string(count_) + " visibility weights, got " +
                          std::to_string(weights.size()));
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("visibility weights must be finite and >= 0");
  }
  NufftOperator copy(*this);
  copy.visibility_weights_ = std::move(weights);
  copy.clear_lipschitz();
  return copy;
}

NufftOperator build_operator(const UVCoverage& coverage, std::size_t rows, std::size_t cols,
                             const NufftOptions& options) {
  return NufftOperator(coverage, rows, cols, options);
}

}  // namespace airi::ri
