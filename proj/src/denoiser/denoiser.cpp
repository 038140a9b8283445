#include "airi/denoiser/denoiser.hpp"

#include <cmath>

#include "airi/errors.hpp"

namespace airi::denoiser {

RescaledDenoiser::RescaledDenoiser(std::shared_ptr<const Denoiser> inner, double trained_sigma,
                                   double target_sigma)
    : inner_(std::move(inner)) {
  if (!inner_) throw ValidationError("rescaled denoiser needs a model");
  if (!(trained_sigma > 0.0) || !(target_sigma > 0.0)) {
    throw ValidationError("noise levels must be positive for denoiser rescaling");
  }
  ratio_ = trained_sigma / target_sigma;
}

Image RescaledDenoiser::apply(const Image& x) const {
  return (1.0 / ratio_) * inner_->apply(ratio_ * x);
}

Dihedral Dihedral::from_index(int index) {
  if (index < 0 || index > 7) throw ValidationError("dihedral index must be in 0..7");
  return Dihedral{index % 4, index >= 4};
}

namespace {

Image flip_lr(const Image& x) {
  Image out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, x.cols() - 1 - c) = x(r, c);
  }
  return out;
}

/// One counter-clockwise quarter turn.
Image rotate90(const Image& x) {
  Image out(x.cols(), x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(x.cols() - 1 - c, r) = x(r, c);
  }
  return out;
}

Image rotate(Image x, int quarter_turns) {
  for (int k = 0; k < ((quarter_turns % 4) + 4) % 4; ++k) x = rotate90(x);
  return x;
}

}  // namespace

Image transform(const Image& x, Dihedral g) {
  return rotate(g.flip ? flip_lr(x) : x, g.rotations);
}

Image inverse_transform(const Image& x, Dihedral g) {
  Image back = rotate(x, 4 - g.rotations);
  return g.flip ? flip_lr(back) : back;
}

Image apply(const DenoiserHandle& handle, const Image& x) {
  if (!handle.model) throw ValidationError("denoiser handle has no model");
  return handle.model->apply(x);
}

Image apply_equivariant(const DenoiserHandle& handle, const Image& x, std::mt19937_64& rng,
                        Dihedral* drawn) {
  if (!handle.model) throw ValidationError("denoiser handle has no model");
  if (x.rows() != x.cols()) {
    throw ValidationError("equivariant denoising with rotations needs a square image");
  }
  const Dihedral g = Dihedral::from_index(static_cast<int>(rng() % 8));
  if (drawn) *drawn = g;
  return inverse_transform(handle.model->apply(transform(x, g)), g);
}

}  // namespace airi::denoiser
