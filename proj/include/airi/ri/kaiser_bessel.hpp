#pragma once

namespace airi::ri {

/// Modified Bessel function of the first kind, order zero (power series).
double bessel_i0(double x);

/// Kaiser-Bessel gridding kernel of width `support` grid cells.
struct KernelSpec {
  int support = 7;
  double beta = 0.0;  // <= 0 selects the standard value for the oversampling factor
};

class KaiserBessel {
 public:
  KaiserBessel(int support, double beta);

  /// Beatty et al. shape parameter for a given support and oversampling factor.
  static double default_beta(int support, double oversampling);

  int support() const { return support_; }
  double beta() const { return beta_; }

  /// Kernel value at offset s (grid cells), zero outside |s| <= support/2.
  double operator()(double s) const;
  /// Continuous Fourier transform int phi(s) exp(2 pi i s xi) ds.
  double transform(double xi) const;

 private:
  int support_;
  double beta_;
};

}  // namespace airi::ri
