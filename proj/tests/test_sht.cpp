#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spherebispec/errors.hpp"
#include "spherebispec/sht.hpp"

using namespace spherebispec;

namespace {
constexpr double pi = std::numbers::pi;

HarmonicCoefficients random_alm(int l_min, int L, std::uint64_t seed) {
  HarmonicCoefficients alm(l_min, L);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int l = l_min; l <= L; ++l) {
    alm.at(l, 0) = n(rng);
    for (int m = 1; m <= l; ++m) alm.at(l, m) = {n(rng), n(rng)};
  }
  return alm;
}
}  // namespace

TEST_CASE("storage and conjugate symmetry") {
  HarmonicCoefficients alm(1, 3);
  alm.at(2, 1) = {1.5, -0.5};
  CHECK(alm.get(2, 1) == std::complex<double>{1.5, -0.5});
  CHECK(alm.get(2, -1) == std::complex<double>{-1.5, -0.5});
  CHECK(alm.get(4, 0) == std::complex<double>{0.0, 0.0});  // out of band
  CHECK(alm.get(0, 0) == std::complex<double>{0.0, 0.0});  // below l_min
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const auto [x, w] = gauss_legendre_rule(12);
  double s0 = 0, s2 = 0, s10 = 0;
  for (int i = 0; i < 12; ++i) {
    s0 += w[i];
    s2 += w[i] * x[i] * x[i];
    s10 += w[i] * std::pow(x[i], 10);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s10 == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("normalized legendre low orders") {
  const double x = 0.3;
  CHECK(legendre_normalized(0, 0, x) ==
        doctest::Approx(1.0 / std::sqrt(4 * pi)).epsilon(1e-14));
  CHECK(legendre_normalized(1, 0, x) ==
        doctest::Approx(std::sqrt(3.0 / (4 * pi)) * x).epsilon(1e-14));
  const double s = std::sqrt(1 - x * x);
  CHECK(legendre_normalized(1, 1, x) ==
        doctest::Approx(-std::sqrt(3.0 / (8 * pi)) * s).epsilon(1e-14));
}

TEST_CASE("legendre columns are orthonormal under the quadrature") {
  const int n = 40;
  const auto [x, w] = gauss_legendre_rule(n);
  std::vector<double> col(30);
  for (int m : {0, 2, 5}) {
    std::vector<std::vector<double>> cols(n);
    for (int i = 0; i < n; ++i) {
      legendre_column(20, m, x[i], cols[i]);
    }
    for (int la = m; la <= 20; la += 4)
      for (int lb = m; lb <= 20; lb += 4) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += w[i] * cols[i][la - m] * cols[i][lb - m];
        s *= 2 * pi;  // absorb the phi integral of |Y_lm|^2
        if (la == lb)
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        else
          CHECK(std::abs(s) < 1e-12);
      }
  }
}

TEST_CASE("round trip at moderate band limit") {
  const int L = 32;
  const auto alm = random_alm(1, L, 7u);
  const auto grid = synthesize(alm, GridSpec{L, 1});
  const auto back = analyze(grid, L, 1);
  double worst = 0;
  for (int l = 1; l <= L; ++l)
    for (int m = 0; m <= l; ++m)
      worst = std::max(worst, std::abs(back.at(l, m) - alm.at(l, m)));
  CHECK(worst < 1e-12);
}

TEST_CASE("parseval under quadrature") {
  const int L = 24;
  const auto alm = random_alm(1, L, 99u);
  const auto grid = synthesize(alm, GridSpec{L, 1});
  double quad = 0;
  for (int i = 0; i < grid.n_theta; ++i)
    for (int j = 0; j < grid.n_phi; ++j)
      quad += grid.theta_weights[i] * (2 * pi / grid.n_phi) * grid.at(i, j) * grid.at(i, j);
  double sum = 0;
  for (int l = 1; l <= L; ++l) {
    sum += std::norm(alm.at(l, 0));
    for (int m = 1; m <= l; ++m) sum += 2 * std::norm(alm.at(l, m));
  }
  CHECK(quad == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("analysis of an undersampled grid is refused") {
  const auto alm = random_alm(1, 8, 3u);
  const auto grid = synthesize(alm, GridSpec{8, 1});
  CHECK_THROWS_AS((void)analyze(grid, 16, 1), guard_error);
}

TEST_CASE("oversampled grid resolves a squared field") {
  // T^2 of a band-limited field is band-limited at 2L; oversample 2 must
  // recover its coefficients exactly through quadrature.
  const int L = 10;
  auto alm = random_alm(1, L, 17u);
  auto grid = synthesize(alm, GridSpec{L, 2});
  for (auto& v : grid.values) v = v * v;
  const auto sq = analyze(grid, 2 * L, 0);
  // check against a direct high-resolution analysis
  auto grid3 = synthesize(alm, GridSpec{L, 3});
  for (auto& v : grid3.values) v = v * v;
  const auto sq3 = analyze(grid3, 2 * L, 0);
  double worst = 0;
  for (int l = 0; l <= 2 * L; ++l)
    for (int m = 0; m <= l; ++m)
      worst = std::max(worst, std::abs(sq.at(l, m) - sq3.at(l, m)));
  CHECK(worst < 1e-12);
}

TEST_CASE("csv round trips") {
  const auto alm = random_alm(2, 6, 5u);
  write_alm_csv("alm_io_test.csv", alm);
  const auto alm2 = read_alm_csv("alm_io_test.csv");
  CHECK(alm2.l_min == 2);
  CHECK(alm2.L == 6);
  double worst = 0;
  for (int l = 2; l <= 6; ++l)
    for (int m = 0; m <= l; ++m)
      worst = std::max(worst, std::abs(alm2.at(l, m) - alm.at(l, m)));
  CHECK(worst < 1e-12);

  const auto grid = synthesize(alm, GridSpec{6, 1});
  write_grid_csv("grid_io_test.csv", grid);
  const auto grid2 = read_grid_csv("grid_io_test.csv");
  CHECK(grid2.n_theta == grid.n_theta);
  CHECK(grid2.n_phi == grid.n_phi);
  worst = 0;
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    worst = std::max(worst, std::abs(grid.values[i] - grid2.values[i]));
  CHECK(worst < 1e-12);
}
