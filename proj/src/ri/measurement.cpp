#include "airi/ri/measurement.hpp"

#include <string>

#include "airi/errors.hpp"

namespace airi::ri {

void LinearMeasurement::check_image(const Image& x) const {
  if (x.rows() != image_rows() || x.cols() != image_cols()) {
    throw ValidationError("image is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                          ", operator expects " + std::to_string(image_rows()) + "x" +
                          std::to_string(image_cols()));
  }
}

void LinearMeasurement::check_data(std::span<const std::complex<double>> y) const {
  if (y.size() != measurement_count()) {
    throw ValidationError("data has " + std::to_string(y.size()) + " entries, operator expects " +
                          std::to_string(measurement_count()));
  }
}

IdentityMeasurement::IdentityMeasurement(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw ValidationError("identity operator needs a non-empty image");
  set_lipschitz(1.0);
}

Visibilities IdentityMeasurement::forward(const Image& x) const {
  check_image(x);
  return as_measurements(x);
}

Image IdentityMeasurement::adjoint(std::span<const std::complex<double>> y) const {
  check_data(y);
  Image out(rows_, cols_);
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i].real();
  return out;
}

Visibilities as_measurements(const Image& data) {
  Visibilities y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) y[i] = {data[i], 0.0};
  return y;
}

}  // namespace airi::ri
