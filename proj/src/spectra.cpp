#include "spherebispec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spherebispec/detail/fileio.hpp"
#include "spherebispec/diagrams.hpp"

namespace spherebispec {

namespace {

void require_admissible(int l1, int l2, int l3) {
  if (!triangle_ok(l1, l2, l3))
    throw std::invalid_argument("triple violates the triangle rule");
  if ((l1 + l2 + l3) & 1)
    throw std::invalid_argument("triple has odd l1+l2+l3");
}

struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

PowerSpectrum::PowerSpectrum(int l_min_, int L_, double fill)
    : l_min(l_min_), L(L_) {
  if (l_min < 0 || L < l_min)
    throw std::domain_error("PowerSpectrum: need 0 <= l_min <= L");
  values.assign(std::size_t(L - l_min) + 1, fill);
}

double PowerSpectrum::at(int l) const {
  if (l < l_min || l > L) throw std::out_of_range("PowerSpectrum: l out of range");
  return values[l - l_min];
}

double& PowerSpectrum::at(int l) {
  if (l < l_min || l > L) throw std::out_of_range("PowerSpectrum: l out of range");
  return values[l - l_min];
}

int delta_factor(int l1, int l2, int l3) {
  if (!(l1 <= l2 && l2 <= l3))
    throw std::invalid_argument("delta_factor: need l1 <= l2 <= l3");
  if (l1 == l3) return 6;
  if (l1 == l2 || l2 == l3) return 2;
  return 1;
}

double estimate_cl(const HarmonicCoefficients& alm, int l) {
  if (l < alm.l_min || l > alm.L)
    throw std::out_of_range("estimate_cl: l out of range");
  double s = std::norm(alm.at(l, 0));
  for (int m = 1; m <= l; ++m) s += 2.0 * std::norm(alm.at(l, m));
  return s / (2.0 * l + 1.0);
}

double estimate_bispectrum(const HarmonicCoefficients& alm, int l1, int l2,
                           int l3, WignerRowCache& cache) {
  require_admissible(l1, l2, l3);
  int ls[3] = {l1, l2, l3};
  std::sort(ls, ls + 3);
  l1 = ls[0]; l2 = ls[1]; l3 = ls[2];
  if (l1 < alm.l_min || l3 > alm.L)
    throw std::out_of_range("estimate_bispectrum: multipole out of range");
  Kahan re, im;
  for (int m1 = -l1; m1 <= l1; ++m1) {
    const Wigner3jRow& row = cache.row(l1, l2, l3, m1);
    const std::complex<double> a1 = alm.get(l1, m1);
    const int m2_lo = std::max(-l2, -l3 - m1);
    const int m2_hi = std::min(l2, l3 - m1);
    for (int m2 = m2_lo; m2 <= m2_hi; ++m2) {
      const double w = row.at(m2);
      if (w == 0.0) continue;
      const std::complex<double> t =
          w * a1 * alm.get(l2, m2) * alm.get(l3, -m1 - m2);
      re.add(t.real());
      im.add(t.imag());
    }
  }
  double scale = 0.0;
  for (int l : {l1, l2, l3}) scale = std::max(scale, estimate_cl(alm, l));
  const double tol = 1e-8 * std::max(std::pow(scale, 1.5), 1e-300);
  if (std::abs(im.sum) > std::max(tol, 1e-12 * std::abs(re.sum)))
    throw std::runtime_error("estimate_bispectrum: imaginary residue too large");
  return re.sum;
}

namespace {

double parity_sign(int l1, int l2, int l3) {
  return (((l1 + l2 + l3) / 2) & 1) ? -1.0 : 1.0;
}

}  // namespace

double normalized_bispectrum(const HarmonicCoefficients& alm, int l1, int l2,
                             int l3, const PowerSpectrum& C,
                             WignerRowCache& cache) {
  require_admissible(l1, l2, l3);
  const double c1 = C.at(l1), c2 = C.at(l2), c3 = C.at(l3);
  if (c1 <= 0.0 || c2 <= 0.0 || c3 <= 0.0)
    throw std::invalid_argument("normalized_bispectrum: C_l must be positive");
  return parity_sign(l1, l2, l3) * estimate_bispectrum(alm, l1, l2, l3, cache) /
         std::sqrt(c1 * c2 * c3);
}

double normalized_bispectrum_hat(const HarmonicCoefficients& alm, int l1,
                                 int l2, int l3, WignerRowCache& cache) {
  require_admissible(l1, l2, l3);
  const double c1 = estimate_cl(alm, l1), c2 = estimate_cl(alm, l2),
               c3 = estimate_cl(alm, l3);
  if (c1 <= 0.0 || c2 <= 0.0 || c3 <= 0.0)
    throw std::runtime_error("normalized_bispectrum_hat: zero Chat_l");
  return parity_sign(l1, l2, l3) * estimate_bispectrum(alm, l1, l2, l3, cache) /
         std::sqrt(c1 * c2 * c3);
}

double moment_I2(int l1, int l2, int l3) {
  require_admissible(l1, l2, l3);
  return double(delta_factor(l1, l2, l3));
}

double moment_I4_offdiag(int l1, int l2, int l3) {
  require_admissible(l1, l2, l3);
  if (!(l1 < l2 && l2 < l3))
    throw std::invalid_argument("moment_I4_offdiag: need l1 < l2 < l3");
  const double w = wigner_6j({l1, l2, l3, l1, l2, l3});
  return 3.0 + 6.0 / (2.0 * l1 + 1.0) + 6.0 / (2.0 * l2 + 1.0) +
         6.0 / (2.0 * l3 + 1.0) + 6.0 * w;
}

double g_factor(int l, int p) {
  if (l < 1 || p < 0) throw std::domain_error("g_factor: need l >= 1, p >= 0");
  double g = 1.0;
  for (int k = 1; k <= p; ++k) g *= (2.0 * l + 1.0) / (2.0 * l + 2.0 * k - 1.0);
  return g;
}

double moment_Ihat(int l1, int l2, int l3, int p) {
  require_admissible(l1, l2, l3);
  if (!(l1 <= l2 && l2 <= l3))
    throw std::invalid_argument("moment_Ihat: need l1 <= l2 <= l3");
  if (p != 1 && p != 2) throw std::invalid_argument("moment_Ihat: p must be 1 or 2");
  double ei2p;
  if (p == 1) {
    ei2p = moment_I2(l1, l2, l3);
  } else if (l1 < l2 && l2 < l3) {
    ei2p = moment_I4_offdiag(l1, l2, l3);
  } else {
    // no printed closed form with repeated indices; fall back to the exact
    // diagram expansion (guarded to small l)
    ei2p = moment_bruteforce(2, l1, l2, l3);
  }
  if (l1 == l3) return ei2p * g_factor(l1, 3 * p);
  if (l1 == l2) return ei2p * g_factor(l1, 2 * p) * g_factor(l3, p);
  if (l2 == l3) return ei2p * g_factor(l1, p) * g_factor(l3, 2 * p);
  return ei2p * g_factor(l1, p) * g_factor(l2, p) * g_factor(l3, p);
}

double uhat_mixed_moment(int l, int q0, const std::vector<int>& pair_powers) {
  if (l < 1) throw std::domain_error("uhat_mixed_moment: l >= 1");
  if (q0 < 0) throw std::domain_error("uhat_mixed_moment: q0 >= 0");
  if (static_cast<int>(pair_powers.size()) > l)
    throw std::invalid_argument("uhat_mixed_moment: more pair slots than l");
  if (q0 & 1) return 0.0;  // unbalanced conjugate powers average to zero
  const int p0 = q0 / 2;
  int p = p0;
  double val = 1.0;
  for (int k = 2 * p0 - 1; k >= 1; k -= 2) val *= k;
  for (int pi : pair_powers) {
    if (pi < 0) throw std::domain_error("uhat_mixed_moment: negative power");
    p += pi;
    for (int k = 2; k <= pi; ++k) val *= k;
  }
  return val * g_factor(l, p);
}

void write_spectrum_csv(const std::string& path, const PowerSpectrum& C) {
  std::ostringstream out;
  out.precision(17);
  out << "l,cl\n";
  for (int l = C.l_min; l <= C.L; ++l) out << l << ',' << C.at(l) << '\n';
  detail::write_file_atomic(path, out.str());
}

PowerSpectrum read_spectrum_csv(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "l,cl")
    throw std::runtime_error(path + ": expected header 'l,cl'");
  std::vector<std::pair<int, double>> rows;
  int l_min = -1, L = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int l;
    char c;
    double cl;
    if (!(ls >> l >> c >> cl) || c != ',')
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    if (l < 0 || cl < 0.0 || !std::isfinite(cl))
      throw std::runtime_error(path + ": invalid entry '" + line + "'");
    if (l_min < 0 || l < l_min) l_min = l;
    L = std::max(L, l);
    rows.emplace_back(l, cl);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no entries");
  PowerSpectrum C(l_min, L);
  for (auto [l, cl] : rows) C.at(l) = cl;
  return C;
}

}  // namespace spherebispec
