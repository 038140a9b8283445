#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "airi/image.hpp"
#include "airi/sara/dictionary.hpp"
#include "airi/sara/wavelet.hpp"

namespace airi::sara {

inline constexpr int kDefaultDepth = 4;
inline constexpr std::size_t kBasisCount = 9;

/// Coefficients of the nine-basis dictionary: Db1..Db8 blocks followed by the Dirac block,
/// each block the size of the image.
struct WaveletCoeffs {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int depth = kDefaultDepth;
  std::vector<double> values;

  std::size_t block_size() const { return rows * cols; }
  std::span<double> block(std::size_t b) {
    return std::span<double>(values).subspan(b * block_size(), block_size());
  }
  std::span<const double> block(std::size_t b) const {
    return std::span<const double>(values).subspan(b * block_size(), block_size());
  }
  bool operator==(const WaveletCoeffs&) const = default;
};

WaveletCoeffs zero_coeffs(std::size_t rows, std::size_t cols, int depth = kDefaultDepth);

/// The average-sparsity dictionary, scaled by 1/3 so that synthesis(analysis(x)) = x.
class SaraDictionary final : public Dictionary {
 public:
  SaraDictionary(std::size_t rows, std::size_t cols, int depth = kDefaultDepth);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  int depth() const { return depth_; }
  std::size_t coefficient_count() const override { return kBasisCount * rows_ * cols_; }

  WaveletCoeffs analysis(const Image& x) const;
  Image synthesis(const WaveletCoeffs& c) const;

  /// Buffer-level variants used in inner loops.
  void analysis(std::span<const double> x, std::span<double> coeffs) const override;
  void synthesis(std::span<const double> coeffs, std::span<double> x) const override;

 private:
  std::size_t rows_;
  std::size_t cols_;
  int depth_;
  std::vector<OrthonormalWavelet> bases_;
};

WaveletCoeffs analysis(const Image& x, int depth = kDefaultDepth);
Image synthesis(const WaveletCoeffs& c);

}  // namespace airi::sara
