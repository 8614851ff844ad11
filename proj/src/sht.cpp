#include "spherebispec/sht.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "spherebispec/detail/fileio.hpp"
#include "spherebispec/errors.hpp"

namespace spherebispec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;
}  // namespace

HarmonicCoefficients::HarmonicCoefficients(int l_min_, int L_)
    : l_min(l_min_), L(L_) {
  if (l_min < 0 || L < l_min)
    throw std::domain_error("HarmonicCoefficients: need 0 <= l_min <= L");
  std::size_t count = 0;
  for (int l = l_min; l <= L; ++l) count += std::size_t(l) + 1;
  values.assign(count, {0.0, 0.0});
}

std::size_t HarmonicCoefficients::index(int l, int m) const {
  if (l < l_min || l > L || m < 0 || m > l)
    throw std::out_of_range("HarmonicCoefficients: (l,m) out of range");
  // offset of row l: sum of (k+1) for k in [l_min, l)
  const std::size_t a = l_min, b = l;
  const std::size_t row = (b * (b - 1) - a * (a - 1)) / 2 + (b - a);
  return row + std::size_t(m);
}

std::complex<double>& HarmonicCoefficients::at(int l, int m) {
  return values[index(l, m)];
}

const std::complex<double>& HarmonicCoefficients::at(int l, int m) const {
  return values[index(l, m)];
}

std::complex<double> HarmonicCoefficients::get(int l, int m) const {
  if (l < l_min || l > L || std::abs(m) > l) return {0.0, 0.0};
  if (m >= 0) return at(l, m);
  const std::complex<double> v = std::conj(at(l, -m));
  return (m & 1) ? -v : v;
}

void legendre_column(int lmax, int m, double x, std::vector<double>& out) {
  if (m < 0 || lmax < m) throw std::domain_error("legendre_column: need 0 <= m <= lmax");
  if (std::abs(x) > 1.0) throw std::domain_error("legendre_column: |x| > 1");
  out.assign(std::size_t(lmax - m) + 1, 0.0);
  const double sx = std::sqrt((1.0 - x) * (1.0 + x));
  double pmm = 1.0 / std::sqrt(kFourPi);
  for (int k = 1; k <= m; ++k)
    pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sx;
  // pmm underflows only where the true values are far below double range;
  // the whole column is then legitimately zero.
  out[0] = pmm;
  if (lmax == m) return;
  out[1] = x * std::sqrt(2.0 * m + 3.0) * pmm;
  double a_prev = std::sqrt(2.0 * m + 3.0);
  for (int l = m + 2; l <= lmax; ++l) {
    const double num = 4.0 * l * l - 1.0;
    const double den = double(l) * l - double(m) * m;
    const double a = std::sqrt(num / den);
    out[l - m] = a * (x * out[l - m - 1] - out[l - m - 2] / a_prev);
    a_prev = a;
  }
}

double legendre_normalized(int l, int m, double x) {
  if (m < 0 || m > l) throw std::domain_error("legendre_normalized: need 0 <= m <= l");
  static thread_local std::vector<double> col;
  legendre_column(l, m, x, col);
  return col[l - m];
}

std::complex<double> ylm(int l, int m, double theta, double phi) {
  if (std::abs(m) > l) throw std::domain_error("ylm: |m| > l");
  const int ma = std::abs(m);
  const double p = legendre_normalized(l, ma, std::cos(theta));
  std::complex<double> v = p * std::polar(1.0, ma * phi);
  if (m < 0) {
    v = std::conj(v);
    if (ma & 1) v = -v;
  }
  return v;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_rule(int n) {
  if (n < 1) throw std::domain_error("gauss_legendre_rule: n >= 1");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  if (n & 1) x[n / 2] = 0.0;
  return {x, w};
}

SphereGrid make_grid(const GridSpec& spec) {
  if (spec.L_synth < 0 || spec.oversample < 1)
    throw std::domain_error("GridSpec: L_synth >= 0 and oversample >= 1");
  SphereGrid g;
  g.n_theta = spec.n_theta();
  g.n_phi = spec.n_phi();
  auto [x, w] = gauss_legendre_rule(g.n_theta);
  g.theta_nodes.resize(g.n_theta);
  // x ascending maps to theta descending; keep theta ascending instead.
  for (int i = 0; i < g.n_theta; ++i) g.theta_nodes[i] = std::acos(x[g.n_theta - 1 - i]);
  g.theta_weights.assign(w.rbegin(), w.rend());
  g.values.assign(std::size_t(g.n_theta) * g.n_phi, 0.0);
  return g;
}

SphereGrid synthesize(const HarmonicCoefficients& alm, const GridSpec& spec) {
  if (spec.L_synth < alm.L)
    throw std::invalid_argument("synthesize: grid spec does not cover alm band limit");
  double scale = 0.0;
  for (const auto& v : alm.values) scale = std::max(scale, std::abs(v));
  for (int l = alm.l_min; l <= alm.L; ++l)
    if (std::abs(alm.at(l, 0).imag()) > 1e-10 * std::max(scale, 1.0))
      throw std::invalid_argument("synthesize: a_{l0} must be real");

  SphereGrid g = make_grid(spec);
  const int L = alm.L;
  std::vector<double> col;
  std::vector<std::complex<double>> fm(std::size_t(L) + 1);
  for (int i = 0; i < g.n_theta; ++i) {
    const double x = std::cos(g.theta_nodes[i]);
    for (int m = 0; m <= L; ++m) {
      const int lstart = std::max(m, alm.l_min);
      std::complex<double> acc{0.0, 0.0};
      if (lstart <= L) {
        legendre_column(L, m, x, col);
        for (int l = lstart; l <= L; ++l) acc += alm.at(l, m) * col[l - m];
      }
      fm[m] = acc;
    }
    for (int j = 0; j < g.n_phi; ++j) {
      const double phi = 2.0 * kPi * j / g.n_phi;
      double val = fm[0].real();
      for (int m = 1; m <= L; ++m) {
        const double c = std::cos(m * phi), s = std::sin(m * phi);
        val += 2.0 * (fm[m].real() * c - fm[m].imag() * s);
      }
      g.at(i, j) = val;
    }
  }
  return g;
}

HarmonicCoefficients analyze(const SphereGrid& grid, int L, int l_min) {
  if (grid.n_theta < L + 1 || grid.n_phi < 2 * L + 1)
    throw guard_error("analyze: grid too coarse for requested band limit");
  HarmonicCoefficients alm(l_min, L);
  const double dphi = 2.0 * kPi / grid.n_phi;
  std::vector<std::complex<double>> gm(std::size_t(L) + 1);
  std::vector<double> col;
  for (int i = 0; i < grid.n_theta; ++i) {
    for (int m = 0; m <= L; ++m) {
      std::complex<double> acc{0.0, 0.0};
      for (int j = 0; j < grid.n_phi; ++j) {
        const double phi = 2.0 * kPi * j / grid.n_phi;
        acc += grid.at(i, j) * std::polar(1.0, -m * phi);
      }
      gm[m] = acc;
    }
    const double x = std::cos(grid.theta_nodes[i]);
    const double wq = grid.theta_weights[i] * dphi;
    for (int m = 0; m <= L; ++m) {
      const int lstart = std::max(m, l_min);
      if (lstart > L) continue;
      legendre_column(L, m, x, col);
      for (int l = lstart; l <= L; ++l) alm.at(l, m) += wq * col[l - m] * gm[m];
    }
  }
  return alm;
}

void write_alm_csv(const std::string& path, const HarmonicCoefficients& alm) {
  std::ostringstream out;
  out.precision(17);
  out << "l,m,re,im\n";
  for (int l = alm.l_min; l <= alm.L; ++l)
    for (int m = 0; m <= l; ++m) {
      const auto v = alm.at(l, m);
      out << l << ',' << m << ',' << v.real() << ',' << v.imag() << '\n';
    }
  detail::write_file_atomic(path, out.str());
}

HarmonicCoefficients read_alm_csv(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "l,m,re,im")
    throw std::runtime_error(path + ": expected header 'l,m,re,im'");
  struct Row { int l, m; double re, im; };
  std::vector<Row> rows;
  int l_min = -1, L = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Row r;
    char c1, c2, c3;
    std::istringstream ls(line);
    if (!(ls >> r.l >> c1 >> r.m >> c2 >> r.re >> c3 >> r.im) || c1 != ',' ||
        c2 != ',' || c3 != ',')
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    if (r.m < 0 || r.m > r.l)
      throw std::runtime_error(path + ": m out of range in '" + line + "'");
    if (l_min < 0 || r.l < l_min) l_min = r.l;
    L = std::max(L, r.l);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no coefficients");
  HarmonicCoefficients alm(l_min, L);
  for (const auto& r : rows) alm.at(r.l, r.m) = {r.re, r.im};
  return alm;
}

void write_grid_csv(const std::string& path, const SphereGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "n_theta,n_phi\n" << grid.n_theta << ',' << grid.n_phi << '\n';
  for (double v : grid.values) out << v << '\n';
  detail::write_file_atomic(path, out.str());
}

SphereGrid read_grid_csv(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "n_theta,n_phi")
    throw std::runtime_error(path + ": expected header 'n_theta,n_phi'");
  int nt = 0, np = 0;
  char c;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated");
  {
    std::istringstream ls(line);
    if (!(ls >> nt >> c >> np) || c != ',' || nt < 1 || np < 1)
      throw std::runtime_error(path + ": bad dimensions");
  }
  SphereGrid g;
  g.n_theta = nt;
  g.n_phi = np;
  auto [x, w] = gauss_legendre_rule(nt);
  g.theta_nodes.resize(nt);
  for (int i = 0; i < nt; ++i) g.theta_nodes[i] = std::acos(x[nt - 1 - i]);
  g.theta_weights.assign(w.rbegin(), w.rend());
  g.values.reserve(std::size_t(nt) * np);
  double v;
  while (in >> v) g.values.push_back(v);
  if (g.values.size() != std::size_t(nt) * np)
    throw std::runtime_error(path + ": value count does not match dimensions");
  return g;
}

}  // namespace spherebispec
