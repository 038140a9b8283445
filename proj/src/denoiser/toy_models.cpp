#include "airi/denoiser/toy_models.hpp"

#include "airi/errors.hpp"

namespace airi::denoiser {
namespace {

ConvLayer blank_layer(std::size_t out, std::size_t in, Activation act) {
  ConvLayer l;
  l.out = out;
  l.in = in;
  l.activation = act;
  l.kernel.assign(out * in * 9, 0.0);
  l.bias.assign(out, 0.0);
  return l;
}

std::vector<ConvLayer> blank_stack(std::size_t width) {
  std::vector<ConvLayer> layers;
  layers.push_back(blank_layer(width, 1, Activation::kRelu));
  for (std::size_t k = 1; k + 1 < kRequiredLayers; ++k) {
    layers.push_back(blank_layer(width, width, Activation::kRelu));
  }
  layers.push_back(blank_layer(1, width, Activation::kNone));
  return layers;
}

ModelFile wrap(std::vector<ConvLayer> layers, ModelInfo info) {
  if (!(info.sigma > 0.0)) info.sigma = 1.0;
  ModelFile m;
  m.layers = std::move(layers);
  m.info = info;
  return m;
}

}  // namespace

Kernel3 dirac_kernel() { return {0, 0, 0, 0, 1, 0, 0, 0, 0}; }

Kernel3 binomial_kernel() {
  return {1.0 / 16, 2.0 / 16, 1.0 / 16, 2.0 / 16, 4.0 / 16, 2.0 / 16, 1.0 / 16, 2.0 / 16, 1.0 / 16};
}

ModelFile linear_residual_model(const Kernel3& kernel, std::size_t width, ModelInfo info) {
  if (width < 2) throw ValidationError("linear residual toy model needs width >= 2");
  std::vector<ConvLayer> layers = blank_stack(width);
  for (std::size_t t = 0; t < 9; ++t) {
    layers.front().weight(0, 0, t / 3, t % 3) = kernel[t];
    layers.front().weight(1, 0, t / 3, t % 3) = -kernel[t];
  }
  for (std::size_t k = 1; k + 1 < layers.size(); ++k) {
    layers[k].weight(0, 0, 1, 1) = 1.0;
    layers[k].weight(1, 1, 1, 1) = 1.0;
  }
  layers.back().weight(0, 0, 1, 1) = 1.0;
  layers.back().weight(0, 1, 1, 1) = -1.0;
  info.residual_skip = true;
  return wrap(std::move(layers), info);
}

ModelFile zero_model(std::size_t width, ModelInfo info) {
  info.residual_skip = true;
  return wrap(blank_stack(width), info);
}

ModelFile smoothing_model(double strength, std::size_t width, ModelInfo info) {
  const Kernel3 blur = binomial_kernel();
  const Kernel3 delta = dirac_kernel();
  Kernel3 k{};
  for (std::size_t t = 0; t < 9; ++t) k[t] = strength * (delta[t] - blur[t]);
  return linear_residual_model(k, width, info);
}

ModelFile gain_model(double gain, std::size_t width, ModelInfo info) {
  Kernel3 k{};
  k[4] = 1.0 - gain;
  return linear_residual_model(k, width, info);
}

}  // namespace airi::denoiser
