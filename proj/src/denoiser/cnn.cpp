#include "airi/denoiser/cnn.hpp"

#include <algorithm>
#include <cmath>

#include "airi/errors.hpp"

namespace airi::denoiser {

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "none"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "none" || s == "linear" || s.empty()) return Activation::kNone;
  throw ValidationError("unknown activation '" + s + "'");
}

void validate_architecture(const std::vector<ConvLayer>& layers) {
  if (layers.size() != kRequiredLayers) {
    throw ValidationError("model has " + std::to_string(layers.size()) +
                          " convolution layers; the DnCNN denoiser requires exactly " +
                          std::to_string(kRequiredLayers));
  }
  const std::size_t width = layers.front().out;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const ConvLayer& l = layers[k];
    const std::string where = "layer " + std::to_string(k);
    if (l.kh != 3 || l.kw != 3) {
      throw ValidationError(where + " has a " + std::to_string(l.kh) + "x" + std::to_string(l.kw) +
                            " kernel; all kernels must be 3x3");
    }
    const std::size_t want_in = k == 0 ? 1 : width;
    const std::size_t want_out = k + 1 == layers.size() ? 1 : width;
    if (l.in != want_in || l.out != want_out) {
      throw ValidationError(where + " maps " + std::to_string(l.in) + " -> " + std::to_string(l.out) +
                            " channels, expected " + std::to_string(want_in) + " -> " +
                            std::to_string(want_out));
    }
    const Activation want_act = k + 1 == layers.size() ? Activation::kNone : Activation::kRelu;
    if (l.activation != want_act) {
      throw ValidationError(where + " activation must be " + to_string(want_act));
    }
    if (l.kernel.size() != l.out * l.in * l.kh * l.kw || l.bias.size() != l.out) {
      throw ValidationError(where + " tensor sizes do not match its shape");
    }
  }
}

std::vector<double> conv2d(const ConvLayer& layer, const std::vector<double>& input,
                           std::size_t rows, std::size_t cols, bool add_bias) {
  const std::size_t plane = rows * cols;
  const auto hr = static_cast<std::ptrdiff_t>(layer.kh / 2);
  const auto hc = static_cast<std::ptrdiff_t>(layer.kw / 2);
  const auto R = static_cast<std::ptrdiff_t>(rows);
  const auto C = static_cast<std::ptrdiff_t>(cols);
  std::vector<double> out(layer.out * plane, 0.0);
  for (std::size_t o = 0; o < layer.out; ++o) {
    double* dst = out.data() + o * plane;
    if (add_bias) std::fill(dst, dst + plane, layer.bias[o]);
    for (std::size_t i = 0; i < layer.in; ++i) {
      const double* src = input.data() + i * plane;
      for (std::size_t kr = 0; kr < layer.kh; ++kr) {
        const std::ptrdiff_t dr = static_cast<std::ptrdiff_t>(kr) - hr;
        for (std::size_t kc = 0; kc < layer.kw; ++kc) {
          const std::ptrdiff_t dc = static_cast<std::ptrdiff_t>(kc) - hc;
          const double w = layer.weight(o, i, kr, kc);
          if (w == 0.0) continue;
          const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, -dc);
          const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(C, C - dc);
          for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(0, -dr); r < std::min<std::ptrdiff_t>(R, R - dr); ++r) {
            double* drow = dst + r * C;
            const double* srow = src + (r + dr) * C + dc;
            for (std::ptrdiff_t c = c0; c < c1; ++c) drow[c] += w * srow[c];
          }
        }
      }
    }
  }
  return out;
}

std::vector<double> conv2d_transpose(const ConvLayer& layer, const std::vector<double>& grad,
                                     std::size_t rows, std::size_t cols) {
  const std::size_t plane = rows * cols;
  const auto hr = static_cast<std::ptrdiff_t>(layer.kh / 2);
  const auto hc = static_cast<std::ptrdiff_t>(layer.kw / 2);
  const auto R = static_cast<std::ptrdiff_t>(rows);
  const auto C = static_cast<std::ptrdiff_t>(cols);
  std::vector<double> out(layer.in * plane, 0.0);
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* src = grad.data() + o * plane;
    for (std::size_t i = 0; i < layer.in; ++i) {
      double* dst = out.data() + i * plane;
      for (std::size_t kr = 0; kr < layer.kh; ++kr) {
        const std::ptrdiff_t dr = static_cast<std::ptrdiff_t>(kr) - hr;
        for (std::size_t kc = 0; kc < layer.kw; ++kc) {
          const std::ptrdiff_t dc = static_cast<std::ptrdiff_t>(kc) - hc;
          const double w = layer.weight(o, i, kr, kc);
          if (w == 0.0) continue;
          const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, -dc);
          const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(C, C - dc);
          for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(0, -dr); r < std::min<std::ptrdiff_t>(R, R - dr); ++r) {
            const double* grow = src + r * C;
            double* drow = dst + (r + dr) * C + dc;
            for (std::ptrdiff_t c = c0; c < c1; ++c) drow[c] += w * grow[c];
          }
        }
      }
    }
  }
  return out;
}

/// Pre-activation masks of every relu layer plus the output relu.
struct CnnDenoiser::Trace {
  std::vector<std::vector<unsigned char>> masks;
  std::vector<unsigned char> output_mask;
  std::vector<double> residual;
  bool kink = false;
};

CnnDenoiser::CnnDenoiser(std::vector<ConvLayer> layers, ModelInfo info)
    : layers_(std::move(layers)), info_(std::move(info)) {
  validate_architecture(layers_);
}

CnnDenoiser::Trace CnnDenoiser::forward_trace(const Image& x) const {
  if (!x.all_finite()) throw ValidationError("denoiser input contains non-finite values");
  Trace t;
  std::vector<double> act(x.values());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    act = conv2d(layers_[k], act, x.rows(), x.cols());
    for (double v : act) {
      if (!std::isfinite(v)) {
        throw NumericalError("non-finite activation in denoiser layer " + std::to_string(k));
      }
    }
    if (layers_[k].activation == Activation::kRelu) {
      std::vector<unsigned char> mask(act.size());
      for (std::size_t j = 0; j < act.size(); ++j) {
        if (act[j] == 0.0) t.kink = true;
        mask[j] = act[j] > 0.0;
        if (!mask[j]) act[j] = 0.0;
      }
      t.masks.push_back(std::move(mask));
    }
  }
  t.residual = std::move(act);
  t.output_mask.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double pre = info_.residual_skip ? x[j] - t.residual[j] : t.residual[j];
    if (pre == 0.0) t.kink = true;
    t.output_mask[j] = pre > 0.0;
  }
  return t;
}

Image CnnDenoiser::residual(const Image& x) const {
  return Image(x.rows(), x.cols(), forward_trace(x).residual);
}

Image CnnDenoiser::apply(const Image& x) const {
  const Trace t = forward_trace(x);
  Image out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double pre = info_.residual_skip ? x[j] - t.residual[j] : t.residual[j];
    out[j] = std::max(pre, 0.0);
  }
  return out;
}

Image CnnDenoiser::jvp(const Image& x, const Image& dx) const {
  require_same_shape(x, dx, "denoiser jvp");
  const Trace t = forward_trace(x);
  std::vector<double> d(dx.values());
  std::size_t relu = 0;
  for (const ConvLayer& layer : layers_) {
    d = conv2d(layer, d, x.rows(), x.cols(), false);
    if (layer.activation == Activation::kRelu) {
      const auto& mask = t.masks[relu++];
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (!mask[j]) d[j] = 0.0;
      }
    }
  }
  Image out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double pre = info_.residual_skip ? dx[j] - d[j] : d[j];
    out[j] = t.output_mask[j] ? pre : 0.0;
  }
  return out;
}

Image CnnDenoiser::vjp(const Image& x, const Image& dy) const {
  require_same_shape(x, dy, "denoiser vjp");
  const Trace t = forward_trace(x);
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = t.output_mask[j] ? dy[j] : 0.0;
  Image out(x.rows(), x.cols());
  if (info_.residual_skip) {
    out.values() = g;
    for (double& v : g) v = -v;
  }
  std::size_t relu = t.masks.size();
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (layers_[k].activation == Activation::kRelu) {
      const auto& mask = t.masks[--relu];
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!mask[j]) g[j] = 0.0;
      }
    }
    g = conv2d_transpose(layers_[k], g, x.rows(), x.cols());
  }
  for (std::size_t j = 0; j < x.size(); ++j) out[j] += g[j];
  return out;
}

bool CnnDenoiser::touched_kink(const Image& x) const { return forward_trace(x).kink; }

}  // namespace airi::denoiser
