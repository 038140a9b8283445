#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "airi/image.hpp"

namespace airi::ri {

using Visibilities = std::vector<std::complex<double>>;

/// Measured data y = Phi x + e with the per-visibility noise level tau.
struct VisibilitySet {
  Visibilities values;
  double tau = 0.0;
};

/// Linear map from real images to complex measurements with a real-part adjoint,
/// i.e. adjoint(y) = Re{Phi^dagger y}.
class LinearMeasurement {
 public:
  virtual ~LinearMeasurement() = default;

  virtual std::size_t image_rows() const = 0;
  virtual std::size_t image_cols() const = 0;
  virtual std::size_t measurement_count() const = 0;

  virtual Visibilities forward(const Image& x) const = 0;
  virtual Image adjoint(std::span<const std::complex<double>> y) const = 0;

  /// Re{Phi^dagger Phi} x
  Image normal(const Image& x) const { return adjoint(forward(x)); }

  /// Cached spectral norm of Re{Phi^dagger Phi}, set by spectral_norm().
  std::optional<double> lipschitz() const { return lipschitz_; }
  void set_lipschitz(double value) { lipschitz_ = value; }
  void clear_lipschitz() { lipschitz_.reset(); }

 protected:
  void check_image(const Image& x) const;
  void check_data(std::span<const std::complex<double>> y) const;

 private:
  std::optional<double> lipschitz_;
};

/// Phi = I: the pure denoising model. Measurements carry the image in their real part.
class IdentityMeasurement final : public LinearMeasurement {
 public:
  IdentityMeasurement(std::size_t rows, std::size_t cols);

  std::size_t image_rows() const override { return rows_; }
  std::size_t image_cols() const override { return cols_; }
  std::size_t measurement_count() const override { return rows_ * cols_; }
  Visibilities forward(const Image& x) const override;
  Image adjoint(std::span<const std::complex<double>> y) const override;

 private:
  std::size_t rows_;
  std::size_t cols_;
};

/// Wraps real image data as measurements for IdentityMeasurement.
Visibilities as_measurements(const Image& data);

}  // namespace airi::ri
