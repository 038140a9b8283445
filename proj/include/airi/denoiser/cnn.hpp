#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "airi/denoiser/denoiser.hpp"
#include "airi/image.hpp"

namespace airi::denoiser {

inline constexpr std::size_t kRequiredLayers = 20;

enum class Activation { kRelu, kNone };
std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// One stride-1, zero-padded 2D cross-correlation layer.
struct ConvLayer {
  std::size_t out = 0;
  std::size_t in = 0;
  std::size_t kh = 3;
  std::size_t kw = 3;
  Activation activation = Activation::kRelu;
  /// (out, in, kh, kw) row-major
  std::vector<double> kernel;
  std::vector<double> bias;

  double& weight(std::size_t o, std::size_t i, std::size_t r, std::size_t c) {
    return kernel[((o * in + i) * kh + r) * kw + c];
  }
  double weight(std::size_t o, std::size_t i, std::size_t r, std::size_t c) const {
    return kernel[((o * in + i) * kh + r) * kw + c];
  }
};

/// Training metadata carried alongside the weights.
struct ModelInfo {
  double sigma = 0.0;
  double a = 0.0;
  std::string loss = "l2";
  double kappa = 0.0;
  double epsilon = 5e-2;
  bool residual_skip = true;
};

/// Checks the architecture: 20 layers of 3x3 kernels, one input and one output channel,
/// constant hidden width, relu after every layer except the last. Throws ValidationError.
void validate_architecture(const std::vector<ConvLayer>& layers);

/// Residual DnCNN without batch normalization: D(x) = relu(x - R(x)) with R the layer
/// stack (or relu(R(x)) when residual_skip is off).
class CnnDenoiser final : public DifferentiableDenoiser {
 public:
  CnnDenoiser(std::vector<ConvLayer> layers, ModelInfo info);

  Image apply(const Image& x) const override;
  Image jvp(const Image& x, const Image& dx) const override;
  Image vjp(const Image& x, const Image& dy) const override;
  bool touched_kink(const Image& x) const override;
  std::string name() const override { return "dncnn"; }

  const std::vector<ConvLayer>& layers() const { return layers_; }
  const ModelInfo& info() const { return info_; }
  std::size_t width() const { return layers_.front().out; }

  /// The layer stack R(x) without the residual subtraction and output relu.
  Image residual(const Image& x) const;

 private:
  struct Trace;
  Trace forward_trace(const Image& x) const;

  std::vector<ConvLayer> layers_;
  ModelInfo info_;
};

/// Stride-1 zero-padded cross-correlation of a (in, rows, cols) tensor.
std::vector<double> conv2d(const ConvLayer& layer, const std::vector<double>& input,
                           std::size_t rows, std::size_t cols, bool add_bias = true);
/// Adjoint of conv2d without bias with respect to its input.
std::vector<double> conv2d_transpose(const ConvLayer& layer, const std::vector<double>& grad,
                                     std::size_t rows, std::size_t cols);

}  // namespace airi::denoiser
