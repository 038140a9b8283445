#include "airi/harness/metrics.hpp"

#include <cmath>
#include <limits>

#include "airi/errors.hpp"
#include "airi/ri/imaging.hpp"

namespace airi::harness {

double rlog(double x) { return std::log10(kRlogScale * x + 1.0) / std::log10(kRlogScale); }

Image rlog(const Image& x) {
  Image out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = rlog(x[j]);
  return out;
}

double snr(const Image& estimate, const Image& truth) {
  require_same_shape(estimate, truth, "snr");
  const double signal = norm(truth);
  if (signal == 0.0) throw ValidationError("snr is undefined for an all-zero groundtruth");
  const double error = distance(truth, estimate);
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(signal / error);
}

double logsnr(const Image& estimate, const Image& truth) { return snr(rlog(estimate), rlog(truth)); }

Image residual_image(const ri::LinearMeasurement& op, std::span<const std::complex<double>> y,
                     const Image& estimate) {
  if (y.size() != op.measurement_count()) throw ValidationError("residual: data length mismatch");
  if (estimate.rows() != op.image_rows() || estimate.cols() != op.image_cols()) {
    throw ValidationError("residual: image shape does not match the operator");
  }
  ri::Visibilities r = op.forward(estimate);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  return ri::dirty_image(op, r);
}

}  // namespace airi::harness
