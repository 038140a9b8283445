#include "airi/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "airi/errors.hpp"

namespace airi {

Image::Image(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), pixels_(rows * cols, fill) {}

Image::Image(std::size_t rows, std::size_t cols, std::vector<double> pixels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
  if (pixels_.size() != rows * cols) {
    throw ValidationError("image payload has " + std::to_string(pixels_.size()) +
                          " values, expected " + std::to_string(rows * cols));
  }
}

bool Image::all_finite() const {
  return std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); });
}

double Image::max() const {
  return pixels_.empty() ? 0.0 : *std::max_element(pixels_.begin(), pixels_.end());
}

double Image::min() const {
  return pixels_.empty() ? 0.0 : *std::min_element(pixels_.begin(), pixels_.end());
}

double Image::sum() const { return std::accumulate(pixels_.begin(), pixels_.end(), 0.0); }

void require_same_shape(const Image& a, const Image& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw ValidationError(what + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Image& a) {
  double s = 0.0;
  for (double v : a.pixels()) s += v * v;
  return std::sqrt(s);
}

double distance(const Image& a, const Image& b) {
  require_same_shape(a, b, "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double relative_change(const Image& next, const Image& prev) {
  const double diff = distance(next, prev);
  const double denom = norm(next);
  if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / denom;
}

Image operator+(const Image& a, const Image& b) {
  require_same_shape(a, b, "add");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Image operator-(const Image& a, const Image& b) {
  require_same_shape(a, b, "subtract");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Image operator*(double s, const Image& a) {
  Image out = a;
  for (double& v : out.pixels()) v *= s;
  return out;
}

void axpy(double alpha, const Image& x, Image& y) {
  require_same_shape(x, y, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

Image centre_impulse(std::size_t rows, std::size_t cols) {
  Image delta(rows, cols);
  delta(rows / 2, cols / 2) = 1.0;
  return delta;
}

}  // namespace airi
