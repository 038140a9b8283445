#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace airi {

/// Real-valued 2D intensity grid stored row-major.
class Image {
 public:
  Image() = default;
  Image(std::size_t rows, std::size_t cols, double fill = 0.0);
  Image(std::size_t rows, std::size_t cols, std::vector<double> pixels);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return pixels_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return pixels_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return pixels_[i]; }
  double operator[](std::size_t i) const { return pixels_[i]; }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }
  std::vector<double>& values() { return pixels_; }
  const std::vector<double>& values() const { return pixels_; }

  bool same_shape(const Image& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;
  double max() const;
  double min() const;
  double sum() const;

  bool operator==(const Image& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> pixels_;
};

/// Throws ValidationError naming `what` when shapes differ.
void require_same_shape(const Image& a, const Image& b, const std::string& what);

double dot(const Image& a, const Image& b);
double norm(const Image& a);
/// ||a - b||
double distance(const Image& a, const Image& b);
/// ||next - prev|| / ||next||; 0 when both vanish, +inf when only next vanishes.
double relative_change(const Image& next, const Image& prev);

Image operator+(const Image& a, const Image& b);
Image operator-(const Image& a, const Image& b);
Image operator*(double s, const Image& a);
/// y += alpha * x
void axpy(double alpha, const Image& x, Image& y);

/// Impulse of unit amplitude at the phase centre (rows/2, cols/2).
Image centre_impulse(std::size_t rows, std::size_t cols);

}  // namespace airi
