#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace spherebispec {

// Triangular array a_lm for l_min <= l <= L, 0 <= m <= l. Negative m is never
// stored: the fields are real, so a_{l,-m} = (-1)^m conj(a_{lm}), and a_{l0}
// must be real.
struct HarmonicCoefficients {
  int l_min = 1;
  int L = 0;
  std::vector<std::complex<double>> values;

  HarmonicCoefficients() = default;
  HarmonicCoefficients(int l_min_, int L_);

  std::size_t index(int l, int m) const;
  std::complex<double>& at(int l, int m);
  const std::complex<double>& at(int l, int m) const;
  // Any |m| <= l, filling m < 0 by conjugate symmetry and out-of-band l with 0.
  std::complex<double> get(int l, int m) const;
};

struct SphereGrid {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> theta_nodes;    // colatitudes in (0, pi), ascending
  std::vector<double> theta_weights;  // Gauss-Legendre weights, sum to 2
  std::vector<double> values;         // row-major n_theta x n_phi

  double& at(int i, int j) { return values[std::size_t(i) * n_phi + j]; }
  double at(int i, int j) const { return values[std::size_t(i) * n_phi + j]; }
};

// L_synth is the band limit the grid resolves exactly; oversample = q makes
// products of q band-limited factors alias-free (q = 2 covers a quadratic
// transform analyzed back up to L_synth).
struct GridSpec {
  int L_synth = 0;
  int oversample = 1;

  int n_theta() const { return oversample * L_synth + 1; }
  int n_phi() const { return 2 * oversample * L_synth + 1; }
};

// Fully normalized associated Legendre function
// sqrt((2l+1)/4pi * (l-m)!/(l+m)!) * P_lm(x), Condon-Shortley phase included.
double legendre_normalized(int l, int m, double x);

// Column P~_{lm}(x) for l = m..lmax, stable in l up to a few thousand.
void legendre_column(int lmax, int m, double x, std::vector<double>& out);

std::complex<double> ylm(int l, int m, double theta, double phi);

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_rule(int n);

SphereGrid make_grid(const GridSpec& spec);

SphereGrid synthesize(const HarmonicCoefficients& alm, const GridSpec& spec);

HarmonicCoefficients analyze(const SphereGrid& grid, int L, int l_min);

// CSV: header "l,m,re,im", m >= 0 only, sorted by (l, m).
void write_alm_csv(const std::string& path, const HarmonicCoefficients& alm);
HarmonicCoefficients read_alm_csv(const std::string& path);

// CSV: header "n_theta,n_phi", then row-major values one per line.
void write_grid_csv(const std::string& path, const SphereGrid& grid);
SphereGrid read_grid_csv(const std::string& path);

}  // namespace spherebispec
