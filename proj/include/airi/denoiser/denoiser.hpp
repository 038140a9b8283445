#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>

#include "airi/image.hpp"

namespace airi::denoiser {

/// Image-to-image regularization operator plugged into the forward-backward loop.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Image apply(const Image& x) const = 0;
  virtual std::string name() const { return "denoiser"; }
};

/// Denoiser whose Jacobian at a point can be applied in both directions.
class DifferentiableDenoiser : public Denoiser {
 public:
  /// J(x) dx
  virtual Image jvp(const Image& x, const Image& dx) const = 0;
  /// J(x)^T dy
  virtual Image vjp(const Image& x, const Image& dy) const = 0;
  /// Whether some activation sat exactly on a relu kink at x during the last derivative pass.
  virtual bool touched_kink(const Image& /*x*/) const { return false; }
};

/// D(x) = scale * x
class LinearScaleDenoiser final : public DifferentiableDenoiser {
 public:
  explicit LinearScaleDenoiser(double scale) : scale_(scale) {}
  Image apply(const Image& x) const override { return scale_ * x; }
  Image jvp(const Image&, const Image& dx) const override { return scale_ * dx; }
  Image vjp(const Image&, const Image& dy) const override { return scale_ * dy; }
  std::string name() const override { return "scale"; }

 private:
  double scale_;
};

/// Wraps an arbitrary callable.
class FunctionDenoiser final : public Denoiser {
 public:
  FunctionDenoiser(std::function<Image(const Image&)> fn, std::string label = "function")
      : fn_(std::move(fn)), label_(std::move(label)) {}
  Image apply(const Image& x) const override { return fn_(x); }
  std::string name() const override { return label_; }

 private:
  std::function<Image(const Image&)> fn_;
  std::string label_;
};

/// Runs a denoiser trained at noise level `trained_sigma` at another level `target_sigma`
/// through the scaling x -> (target/trained) D((trained/target) x).
class RescaledDenoiser final : public Denoiser {
 public:
  RescaledDenoiser(std::shared_ptr<const Denoiser> inner, double trained_sigma, double target_sigma);
  Image apply(const Image& x) const override;
  std::string name() const override { return "rescaled " + inner_->name(); }

 private:
  std::shared_ptr<const Denoiser> inner_;
  double ratio_;
};

/// Element of the 8-element dihedral group: `rotations` quarter turns after an optional
/// left-right flip. Index = rotations + 4 * flip.
struct Dihedral {
  int rotations = 0;
  bool flip = false;

  static Dihedral from_index(int index);
  int index() const { return rotations + (flip ? 4 : 0); }
};

Image transform(const Image& x, Dihedral g);
Image inverse_transform(const Image& x, Dihedral g);

/// A denoiser plus how it is applied inside a solver.
struct DenoiserHandle {
  std::shared_ptr<const Denoiser> model;
  bool equivariant = false;
  std::uint64_t seed = 0;
};

Image apply(const DenoiserHandle& handle, const Image& x);

/// Draws g uniformly from the dihedral group and returns g^-1(D(g(x))).
/// Requires a square image. The drawn element is written to `drawn` when given.
Image apply_equivariant(const DenoiserHandle& handle, const Image& x, std::mt19937_64& rng,
                        Dihedral* drawn = nullptr);

}  // namespace airi::denoiser
