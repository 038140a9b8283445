#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "airi/image.hpp"
#include "airi/sara/dictionary.hpp"

namespace airi::sara {

/// Periodized orthonormal 2D discrete wavelet transform (Mallat layout, coefficients
/// stored in place in a rows x cols array). Exactly orthogonal on the torus.
class OrthonormalWavelet {
 public:
  OrthonormalWavelet(int daubechies_order, std::size_t rows, std::size_t cols, int depth);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int depth() const { return depth_; }

  void analyze(std::span<const double> image, std::span<double> coeffs) const;
  void synthesize(std::span<const double> coeffs, std::span<double> image) const;

  Image analyze(const Image& x) const;
  Image synthesize(const Image& c) const;

 private:
  std::vector<double> low_;
  std::vector<double> high_;
  std::size_t rows_;
  std::size_t cols_;
  int depth_;
};

/// A single orthonormal wavelet basis exposed as a dictionary (no rescaling).
class BasisDictionary final : public Dictionary {
 public:
  BasisDictionary(int daubechies_order, std::size_t rows, std::size_t cols, int depth)
      : wavelet_(daubechies_order, rows, cols, depth) {}

  std::size_t rows() const override { return wavelet_.rows(); }
  std::size_t cols() const override { return wavelet_.cols(); }
  std::size_t coefficient_count() const override { return wavelet_.rows() * wavelet_.cols(); }
  void analysis(std::span<const double> image, std::span<double> coeffs) const override {
    wavelet_.analyze(image, coeffs);
  }
  void synthesis(std::span<const double> coeffs, std::span<double> image) const override {
    wavelet_.synthesize(coeffs, image);
  }

 private:
  OrthonormalWavelet wavelet_;
};

}  // namespace airi::sara
