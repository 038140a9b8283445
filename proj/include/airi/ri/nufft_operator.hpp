#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "airi/ri/kaiser_bessel.hpp"
#include "airi/ri/measurement.hpp"
#include "airi/ri/uv_coverage.hpp"

namespace airi::ri {

struct NufftOptions {
  double oversampling = 2.0;
  KernelSpec kernel;
};

/// One row of the interpolation matrix G: a separable support x support footprint
/// anchored at (row_base, col_base) on the oversampled grid (indices taken modulo
/// the grid size).
struct GridFootprint {
  std::int64_t row_base = 0;
  std::int64_t col_base = 0;
  std::span<const double> row_weights;
  std::span<const double> col_weights;
  double visibility_weight = 1.0;
};

/// Phi = G F Z: deapodization and zero padding (Z), oversampled FFT (F), and
/// Kaiser-Bessel interpolation onto the uv points (G).
///
/// Convention: y_i = sum_{r,c} x[r,c] exp(-i (w_u,i (c - N2/2) + w_v,i (r - N1/2)))
/// with w = 2 pi * (u, v) * cell_size. Immutable after construction; forward and
/// adjoint are reentrant and allocate their FFT buffers per call.
class NufftOperator final : public LinearMeasurement {
 public:
  NufftOperator(const UVCoverage& coverage, std::size_t rows, std::size_t cols,
                const NufftOptions& options = {});

  std::size_t image_rows() const override { return rows_; }
  std::size_t image_cols() const override { return cols_; }
  std::size_t measurement_count() const override { return count_; }
  Visibilities forward(const Image& x) const override;
  Image adjoint(std::span<const std::complex<double>> y) const override;

  std::size_t grid_rows() const { return grid_rows_; }
  std::size_t grid_cols() const { return grid_cols_; }
  int support() const { return kernel_.support(); }
  const KaiserBessel& kernel() const { return kernel_; }

  /// Footprint of measurement i (original ordering).
  GridFootprint footprint(std::size_t i) const;

  /// Per-visibility weights multiplying the rows of G (natural weighting uses
  /// 1 / noise std). Returns a new operator; the cached spectral norm is dropped.
  NufftOperator with_visibility_weights(std::vector<double> weights) const;

 private:
  struct FftPlans;

  Image crop_and_correct(const std::complex<double>* grid) const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t grid_rows_ = 0;
  std::size_t grid_cols_ = 0;
  std::size_t count_ = 0;
  KaiserBessel kernel_;
  // Interpolation table in canonical (sorted) order so the adjoint scatter does not
  // depend on the order in which visibilities were supplied.
  std::vector<std::uint32_t> original_index_;
  std::vector<std::int64_t> row_base_;
  std::vector<std::int64_t> col_base_;
  std::vector<double> row_weights_;
  std::vector<double> col_weights_;
  std::vector<double> visibility_weights_;  // indexed by original position
  std::vector<double> correction_rows_;
  std::vector<double> correction_cols_;
  std::shared_ptr<const FftPlans> plans_;
};

/// Validates the coverage (in band, even image dimensions) and precomputes G.
NufftOperator build_operator(const UVCoverage& coverage, std::size_t rows, std::size_t cols,
                             const NufftOptions& options = {});

}  // namespace airi::ri
