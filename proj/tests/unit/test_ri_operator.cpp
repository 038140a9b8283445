#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>

#include "airi/errors.hpp"
#include "airi/image_io.hpp"
#include "airi/ri/imaging.hpp"
#include "airi/ri/kaiser_bessel.hpp"
#include "airi/ri/nufft_operator.hpp"
#include "oracles.hpp"

using namespace airi;
using namespace airi::ri;

namespace {

UVCoverage random_coverage(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return coverage_from_normalized(oracle::random_normalized_points(m, rng));
}

}  // namespace

TEST_CASE("bessel_i0 series matches the standard library") {
  for (double x : {0.0, 0.5, 3.0, 10.0, 16.25, 25.0}) {
    CHECK(bessel_i0(x) == doctest::Approx(std::cyl_bessel_i(0.0, x)).epsilon(1e-14));
  }
}

TEST_CASE("Kaiser-Bessel transform agrees with quadrature") {
  const KaiserBessel kb(7, KaiserBessel::default_beta(7, 2.0));
  for (double xi : {0.0, 0.05, 0.13, 0.25}) {
    // Composite Simpson on [-3.5, 3.5].
    const int n = 20000;
    const double h = 7.0 / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double s = -3.5 + k * h;
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      sum += w * kb(s) * std::cos(2.0 * std::numbers::pi * s * xi);
    }
    sum *= h / 3.0;
    CHECK(kb.transform(xi) == doctest::Approx(sum).epsilon(1e-9));
  }
}

TEST_CASE("build_operator validates its inputs") {
  UVCoverage cov = coverage_from_normalized({{0.1, 0.2}, {0.5, 3.3}, {-0.2, 0.0}});
  try {
    build_operator(cov, 8, 8);
    FAIL("expected out-of-band rejection");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("uv point 1") != std::string::npos);
  }
  cov.points[1].v = 0.1;
  CHECK_THROWS_AS(build_operator(cov, 7, 8), ValidationError);
  CHECK_THROWS_AS(build_operator(cov, 8, 8, {.oversampling = 0.5}), ValidationError);
  CHECK_THROWS_AS(build_operator(cov, 8, 8, {.kernel = {.support = 1}}), ValidationError);
  CHECK_NOTHROW(build_operator(cov, 8, 8));
}

TEST_CASE("interpolation rows have at most J^2 nonzeros") {
  const auto cov = random_coverage(30, 3);
  const auto op = build_operator(cov, 16, 16);
  for (std::size_t i = 0; i < cov.count(); ++i) {
    const auto fp = op.footprint(i);
    const auto nz_r = std::count_if(fp.row_weights.begin(), fp.row_weights.end(),
                                    [](double w) { return w != 0.0; });
    const auto nz_c = std::count_if(fp.col_weights.begin(), fp.col_weights.end(),
                                    [](double w) { return w != 0.0; });
    CHECK(nz_r * nz_c <= 49);
  }
}

TEST_CASE("DC sample returns the pixel sum; centre impulse gives flat visibilities") {
  std::mt19937_64 rng(5);
  const auto op = build_operator(coverage_from_normalized({{0.0, 0.0}}), 12, 10);
  const Image x = oracle::random_image(12, 10, rng);
  const auto y = op.forward(x);
  CHECK(std::abs(y[0] - std::complex<double>(x.sum(), 0.0)) <= 1e-6 * std::abs(x.sum()));

  const auto op2 = build_operator(random_coverage(40, 6), 16, 16);
  const auto flat = op2.forward(centre_impulse(16, 16));
  for (const auto& v : flat) CHECK(std::abs(std::abs(v) - 1.0) <= 1e-6);

  const auto zeros = op2.forward(Image(16, 16));
  for (const auto& v : zeros) CHECK(v == std::complex<double>{});
  const Image back = op2.adjoint(Visibilities(40));
  CHECK(norm(back) == 0.0);
}

TEST_CASE("forward and adjoint match the dense direct-evaluation oracle") {
  std::mt19937_64 rng(11);
  for (auto [rows, cols, m] : {std::tuple{8, 8, 20}, {16, 16, 60}, {8, 16, 33}, {16, 12, 25}}) {
    const auto cov = random_coverage(static_cast<std::size_t>(m), rng());
    const auto op = build_operator(cov, rows, cols);
    const Eigen::MatrixXcd a = oracle::dense_dft(cov, rows, cols);

    const Image x = oracle::random_image(rows, cols, rng);
    const Eigen::VectorXcd expected = a * oracle::to_vector(x).cast<std::complex<double>>();
    CHECK(oracle::rel_error(oracle::to_vector(op.forward(x)), expected) <= 1e-6);

    const auto y = oracle::random_visibilities(static_cast<std::size_t>(m), rng);
    const Eigen::VectorXd back = (a.adjoint() * oracle::to_vector(y)).real();
    CHECK(oracle::rel_error(oracle::to_vector(op.adjoint(y)), back) <= 1e-6);
  }
}

TEST_CASE("adjoint identity holds to 1e-10") {
  std::mt19937_64 rng(21);
  const auto op = build_operator(random_coverage(200, 9), 32, 24);
  for (int trial = 0; trial < 50; ++trial) {
    const Image x = oracle::random_image(32, 24, rng);
    const auto y = oracle::random_visibilities(200, rng);
    const auto fx = op.forward(x);
    double lhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += (std::conj(fx[i]) * y[i]).real();
    const double rhs = dot(x, op.adjoint(y));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1e-300) + 1e-12 * norm(x));
  }
}

TEST_CASE("dirty beam peaks at exactly one and scales the dirty image of a centred source") {
  const auto op = build_operator(random_coverage(80, 13), 16, 16);
  const Image beam = dirty_beam(op);
  CHECK(beam.max() == 1.0);

  const double amplitude = 2.75;
  const Image source = amplitude * centre_impulse(16, 16);
  const Image dirty = dirty_image(op, op.forward(source));
  CHECK(distance(dirty, amplitude * beam) <= 1e-8 * norm(dirty));

  CHECK(norm(dirty_image(op, Visibilities(80))) == 0.0);

  // All-zero weights give a degenerate beam.
  const auto dead = op.with_visibility_weights(std::vector<double>(80, 0.0));
  CHECK_THROWS_AS(dirty_beam(dead), NumericalError);
}

TEST_CASE("spectral norm: unitary embedding, dense oracle, scaling, permutation") {
  SUBCASE("full grid sampling scaled by 1/sqrt(n) is unitary") {
    const std::size_t n = 8;
    std::vector<UVPoint> pts;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        pts.push_back({2.0 * std::numbers::pi * (static_cast<double>(a) - 4.0) / n,
                       2.0 * std::numbers::pi * (static_cast<double>(b) - 4.0) / n});
      }
    }
    auto op = build_operator(coverage_from_normalized(pts), n, n)
                  .with_visibility_weights(std::vector<double>(n * n, 1.0 / n));
    const double tol = 1e-8;
    const auto res = spectral_norm(op, tol, 500, 1);
    CHECK(res.converged);
    CHECK(std::abs(res.value - 1.0) <= 1e-6);
    CHECK(op.lipschitz().has_value());
  }
  SUBCASE("matches the dense eigensolver") {
    const auto cov = random_coverage(20, 17);
    auto op = build_operator(cov, 8, 8);
    const Eigen::MatrixXcd a = oracle::dense_dft(cov, 8, 8);
    const Eigen::MatrixXd normal = (a.adjoint() * a).real();
    const double expected = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(normal).eigenvalues().maxCoeff();
    const auto res = spectral_norm(op, 1e-12, 5000, 2);
    CHECK(res.value == doctest::Approx(expected).epsilon(1e-6));

    auto doubled = op.with_visibility_weights(std::vector<double>(20, 2.0));
    const auto res2 = spectral_norm(doubled, 1e-12, 5000, 2);
    CHECK(res2.value == doctest::Approx(4.0 * res.value).epsilon(1e-9));
  }
  SUBCASE("invariant under permutation of uv points") {
    auto cov = random_coverage(50, 19);
    auto op = build_operator(cov, 16, 16);
    std::mt19937_64 rng(3);
    std::shuffle(cov.points.begin(), cov.points.end(), rng);
    auto shuffled = build_operator(cov, 16, 16);
    CHECK(spectral_norm(op, 1e-9, 500, 4).value == spectral_norm(shuffled, 1e-9, 500, 4).value);
  }
  SUBCASE("unconverged runs are flagged") {
    auto op = build_operator(random_coverage(50, 23), 16, 16);
    const auto res = spectral_norm(op, 1e-15, 2, 4);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 2);
  }
}

TEST_CASE("simulate_visibilities: noise level, noiseless limit, determinism") {
  const auto op = build_operator(random_coverage(100, 29), 16, 16);
  std::mt19937_64 rng(31);
  const Image gt = oracle::random_image(16, 16, rng, 0.0, 1.0);
  const auto clean = op.forward(gt);
  double energy = 0.0;
  for (const auto& v : clean) energy += std::norm(v);
  const double signal = std::sqrt(energy);

  const auto total = simulate_visibilities(op, gt, 30.0, 7, NoiseConvention::kTotalNorm);
  CHECK(total.tau == doctest::Approx(signal * std::pow(10.0, -1.5)).epsilon(1e-14));
  const auto per_vis = simulate_visibilities(op, gt, 30.0, 7, NoiseConvention::kPerVisibility);
  CHECK(per_vis.tau == doctest::Approx(signal / 10.0 * std::pow(10.0, -1.5)).epsilon(1e-14));

  const auto noiseless = simulate_visibilities(op, gt, std::numeric_limits<double>::infinity(), 7);
  CHECK(noiseless.tau == 0.0);
  CHECK(noiseless.values == clean);

  const auto again = simulate_visibilities(op, gt, 30.0, 7, NoiseConvention::kTotalNorm);
  CHECK(again.values == total.values);
  const auto other = simulate_visibilities(op, gt, 30.0, 8, NoiseConvention::kTotalNorm);
  CHECK(other.values != total.values);

  CHECK_THROWS_AS(simulate_visibilities(op, Image(16, 16), 30.0, 1), ValidationError);
  CHECK_THROWS_AS(simulate_visibilities(op, Image(8, 8, 1.0), 30.0, 1), ValidationError);
}

TEST_CASE("complex noise has total variance tau^2") {
  std::vector<UVPoint> pts(20000, UVPoint{0.0, 0.0});
  const auto op = build_operator(coverage_from_normalized(pts), 8, 8);
  const Image gt(8, 8, 1.0);
  const auto sim = simulate_visibilities(op, gt, 10.0, 3);
  const auto clean = op.forward(gt);
  double re2 = 0.0, im2 = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto e = sim.values[i] - clean[i];
    re2 += e.real() * e.real();
    im2 += e.imag() * e.imag();
  }
  const double n = static_cast<double>(clean.size());
  CHECK(re2 / n == doctest::Approx(sim.tau * sim.tau / 2.0).epsilon(0.05));
  CHECK(im2 / n == doctest::Approx(sim.tau * sim.tau / 2.0).epsilon(0.05));
}

TEST_CASE("image and coverage files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "airi_ri_io";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(41);
  const Image img = oracle::random_image(6, 10, rng);
  save_image(img, dir / "x.img");
  CHECK(load_image(dir / "x.img") == img);

  UVCoverage cov = random_coverage(12, 43);
  cov.cell_size = 1e-5;
  for (auto& p : cov.points) {
    p.u /= 1e-5;
    p.v /= 1e-5;
  }
  save_coverage_csv(cov, dir / "uv.csv");
  const auto loaded = load_coverage_csv(dir / "uv.csv", 1e-5);
  REQUIRE(loaded.count() == cov.count());
  for (std::size_t i = 0; i < cov.count(); ++i) {
    CHECK(loaded.points[i].u == cov.points[i].u);
    CHECK(loaded.points[i].v == cov.points[i].v);
  }
  const auto fitted = load_coverage_csv(dir / "uv.csv");
  CHECK(fitted.cell_size == doctest::Approx(fit_cell_size(cov.points)));
}
