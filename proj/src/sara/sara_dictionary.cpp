#include "airi/sara/sara_dictionary.hpp"

#include <algorithm>
#include <string>

#include "airi/errors.hpp"

namespace airi::sara {
namespace {
constexpr double kScale = 1.0 / 3.0;
}

WaveletCoeffs zero_coeffs(std::size_t rows, std::size_t cols, int depth) {
  WaveletCoeffs c;
  c.rows = rows;
  c.cols = cols;
  c.depth = depth;
  c.values.assign(kBasisCount * rows * cols, 0.0);
  return c;
}

SaraDictionary::SaraDictionary(std::size_t rows, std::size_t cols, int depth)
    : rows_(rows), cols_(cols), depth_(depth) {
  bases_.reserve(kBasisCount - 1);
  for (int order = 1; order <= 8; ++order) bases_.emplace_back(order, rows, cols, depth);
}

void SaraDictionary::analysis(std::span<const double> x, std::span<double> coeffs) const {
  const std::size_t n = rows_ * cols_;
  if (x.size() != n || coeffs.size() != kBasisCount * n) {
    throw ValidationError("dictionary analysis: buffer sizes do not match " +
                          std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (std::size_t b = 0; b < bases_.size(); ++b) {
    auto block = coeffs.subspan(b * n, n);
    bases_[b].analyze(x, block);
    for (double& v : block) v *= kScale;
  }
  auto dirac = coeffs.subspan((kBasisCount - 1) * n, n);
  std::transform(x.begin(), x.end(), dirac.begin(), [](double v) { return v * kScale; });
}

void SaraDictionary::synthesis(std::span<const double> coeffs, std::span<double> x) const {
  const std::size_t n = rows_ * cols_;
  if (x.size() != n || coeffs.size() != kBasisCount * n) {
    throw ValidationError("dictionary synthesis: expected " + std::to_string(kBasisCount * n) +
                          " coefficients, got " + std::to_string(coeffs.size()));
  }
  std::vector<double> scratch(n);
  const auto dirac = coeffs.subspan((kBasisCount - 1) * n, n);
  std::copy(dirac.begin(), dirac.end(), x.begin());
  for (std::size_t b = 0; b < bases_.size(); ++b) {
    bases_[b].synthesize(coeffs.subspan(b * n, n), scratch);
    for (std::size_t i = 0; i < n; ++i) x[i] += scratch[i];
  }
  for (double& v : x) v *= kScale;
}

WaveletCoeffs SaraDictionary::analysis(const Image& x) const {
  if (x.rows() != rows_ || x.cols() != cols_) {
    throw ValidationError("dictionary analysis: image shape mismatch");
  }
  WaveletCoeffs c = zero_coeffs(rows_, cols_, depth_);
  analysis(x.pixels(), c.values);
  return c;
}

Image SaraDictionary::synthesis(const WaveletCoeffs& c) const {
  if (c.rows != rows_ || c.cols != cols_ || c.depth != depth_) {
    throw ValidationError("dictionary synthesis: coefficient layout mismatch");
  }
  Image x(rows_, cols_);
  synthesis(c.values, x.pixels());
  return x;
}

WaveletCoeffs analysis(const Image& x, int depth) {
  return SaraDictionary(x.rows(), x.cols(), depth).analysis(x);
}

Image synthesis(const WaveletCoeffs& c) {
  if (c.values.size() != kBasisCount * c.rows * c.cols) {
    throw ValidationError("inconsistent coefficient block lengths: expected " +
                          std::to_string(kBasisCount * c.rows * c.cols) + ", got " +
                          std::to_string(c.values.size()));
  }
  return SaraDictionary(c.rows, c.cols, c.depth).synthesis(c);
}

}  // namespace airi::sara
