#include "airi/sara/wavelet.hpp"

#include <algorithm>
#include <string>

#include "airi/errors.hpp"
#include "airi/sara/daubechies.hpp"

namespace airi::sara {
namespace {

// One level on a strided line of length n (even). Output: approximations then details.
// `ext` holds the periodically extended line so the filter loop needs no wrap-around.
void analyze_line(const double* in, std::size_t stride, std::size_t n, const std::vector<double>& h,
                  const std::vector<double>& g, std::vector<double>& ext, double* out) {
  const std::size_t half = n / 2;
  const std::size_t taps = h.size();
  for (std::size_t k = 0; k < n + taps; ++k) ext[k] = in[(k % n) * stride];
  for (std::size_t k = 0; k < half; ++k) {
    const double* seg = ext.data() + 2 * k;
    double a = 0.0, d = 0.0;
    for (std::size_t t = 0; t < taps; ++t) {
      a += h[t] * seg[t];
      d += g[t] * seg[t];
    }
    out[k * stride] = a;
    out[(half + k) * stride] = d;
  }
}

void synthesize_line(const double* in, std::size_t stride, std::size_t n,
                     const std::vector<double>& h, const std::vector<double>& g,
                     std::vector<double>& ext, double* out) {
  const std::size_t half = n / 2;
  const std::size_t taps = h.size();
  std::fill(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(n + taps), 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const double a = in[k * stride];
    const double d = in[(half + k) * stride];
    double* seg = ext.data() + 2 * k;
    for (std::size_t t = 0; t < taps; ++t) seg[t] += h[t] * a + g[t] * d;
  }
  for (std::size_t k = n; k < n + taps; ++k) ext[k % n] += ext[k];
  for (std::size_t k = 0; k < n; ++k) out[k * stride] = ext[k];
}

}  // namespace

OrthonormalWavelet::OrthonormalWavelet(int daubechies_order, std::size_t rows, std::size_t cols,
                                       int depth)
    : rows_(rows), cols_(cols), depth_(depth) {
  if (depth < 0) throw ValidationError("wavelet depth must be >= 0");
  const std::size_t block = std::size_t{1} << depth;
  if (rows == 0 || cols == 0 || rows % block != 0 || cols % block != 0) {
    throw ValidationError("image " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " is not divisible by 2^" + std::to_string(depth));
  }
  const auto filter = daubechies_filter(daubechies_order);
  low_.assign(filter.begin(), filter.end());
  high_.resize(low_.size());
  const std::size_t L = low_.size();
  for (std::size_t t = 0; t < L; ++t) high_[t] = ((t % 2) ? -1.0 : 1.0) * low_[L - 1 - t];
}

void OrthonormalWavelet::analyze(std::span<const double> image, std::span<double> coeffs) const {
  std::copy(image.begin(), image.end(), coeffs.begin());
  std::vector<double> scratch(std::max(rows_, cols_) + low_.size());
  std::size_t r = rows_, c = cols_;
  for (int level = 0; level < depth_; ++level) {
    for (std::size_t i = 0; i < r; ++i) {
      double* line = coeffs.data() + i * cols_;
      analyze_line(line, 1, c, low_, high_, scratch, line);
    }
    for (std::size_t j = 0; j < c; ++j) {
      double* line = coeffs.data() + j;
      analyze_line(line, cols_, r, low_, high_, scratch, line);
    }
    r /= 2;
    c /= 2;
  }
}

void OrthonormalWavelet::synthesize(std::span<const double> coeffs, std::span<double> image) const {
  std::copy(coeffs.begin(), coeffs.end(), image.begin());
  std::vector<double> scratch(std::max(rows_, cols_) + low_.size());
  for (int level = depth_ - 1; level >= 0; --level) {
    const std::size_t r = rows_ >> level;
    const std::size_t c = cols_ >> level;
    for (std::size_t j = 0; j < c; ++j) {
      double* line = image.data() + j;
      synthesize_line(line, cols_, r, low_, high_, scratch, line);
    }
    for (std::size_t i = 0; i < r; ++i) {
      double* line = image.data() + i * cols_;
      synthesize_line(line, 1, c, low_, high_, scratch, line);
    }
  }
}

Image OrthonormalWavelet::analyze(const Image& x) const {
  if (x.rows() != rows_ || x.cols() != cols_) throw ValidationError("wavelet: image shape mismatch");
  Image out(rows_, cols_);
  analyze(x.pixels(), out.pixels());
  return out;
}

Image OrthonormalWavelet::synthesize(const Image& c) const {
  if (c.rows() != rows_ || c.cols() != cols_) throw ValidationError("wavelet: coefficient shape mismatch");
  Image out(rows_, cols_);
  synthesize(c.pixels(), out.pixels());
  return out;
}

}  // namespace airi::sara
