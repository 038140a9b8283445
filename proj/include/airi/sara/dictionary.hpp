#pragma once

#include <cstddef>
#include <span>

namespace airi::sara {

/// A linear synthesis operator with unit spectral norm, seen through its coefficient buffers.
class Dictionary {
 public:
  virtual ~Dictionary() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual std::size_t coefficient_count() const = 0;

  /// coeffs = adjoint applied to image
  virtual void analysis(std::span<const double> image, std::span<double> coeffs) const = 0;
  /// image = dictionary applied to coeffs
  virtual void synthesis(std::span<const double> coeffs, std::span<double> image) const = 0;

  std::size_t pixel_count() const { return rows() * cols(); }
};

}  // namespace airi::sara
