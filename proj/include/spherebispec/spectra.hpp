#pragma once

#include <string>
#include <vector>

#include "spherebispec/sht.hpp"
#include "spherebispec/wigner.hpp"

namespace spherebispec {

// Angular power spectrum C_l on l_min..L, strictly positive.
struct PowerSpectrum {
  int l_min = 1;
  int L = 0;
  std::vector<double> values;

  PowerSpectrum() = default;
  PowerSpectrum(int l_min_, int L_, double fill = 0.0);
  double at(int l) const;
  double& at(int l);
};

// Multiplicity factor: 1 (all distinct), 2 (exactly two equal), 6 (all equal).
// Requires l1 <= l2 <= l3.
int delta_factor(int l1, int l2, int l3);

double estimate_cl(const HarmonicCoefficients& alm, int l);

// Angle-averaged bispectrum estimate; arguments are canonically sorted first
// so permutations of (l1,l2,l3) give bitwise identical results.
double estimate_bispectrum(const HarmonicCoefficients& alm, int l1, int l2,
                           int l3, WignerRowCache& cache);

double normalized_bispectrum(const HarmonicCoefficients& alm, int l1, int l2,
                             int l3, const PowerSpectrum& C,
                             WignerRowCache& cache);

double normalized_bispectrum_hat(const HarmonicCoefficients& alm, int l1,
                                 int l2, int l3, WignerRowCache& cache);

double moment_I2(int l1, int l2, int l3);

// Exact fourth moment for strictly ordered l1 < l2 < l3.
double moment_I4_offdiag(int l1, int l2, int l3);

// Product over k = 1..p of (2l+1)/(2l+2k-1).
double g_factor(int l, int p);

// E of the 2p-th power of the spectrum-estimated normalized bispectrum,
// p in {1, 2}. Repeated-index fourth moments go through the diagram oracle
// and are therefore limited to l3 <= 6.
double moment_Ihat(int l1, int l2, int l3, int p);

// Closed-form mixed moment of powers of |a_lm|^2 / ((2l+1) Chat_l)-type
// ratios: q0 is the power on the m = 0 slot (must be even), pair_powers are
// the powers on distinct m > 0 slots. Value (2p0-1)!! * prod(p_i!) * g(l, p)
// with p0 = q0/2 and p = p0 + sum p_i.
double uhat_mixed_moment(int l, int q0, const std::vector<int>& pair_powers);

// CSV with header "l,cl".
void write_spectrum_csv(const std::string& path, const PowerSpectrum& C);
PowerSpectrum read_spectrum_csv(const std::string& path);

}  // namespace spherebispec
