#include "spherebispec/wigner.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spherebispec {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;
using BigRat = mp::cpp_rational;
using BigFloat = mp::cpp_bin_float_50;

bool TripleLM::admissible() const {
  return std::abs(m1) <= l1 && std::abs(m2) <= l2 && std::abs(m3) <= l3;
}

bool triangle_ok(int l1, int l2, int l3) {
  return l1 <= l2 + l3 && l2 <= l1 + l3 && l3 <= l1 + l2;
}

namespace {

// Returns by value: callers combine several factorials in one expression,
// and growing the cache must not invalidate what they already hold.
BigInt big_factorial(int n) {
  static std::vector<BigInt> cache{BigInt(1)};
  while (static_cast<int>(cache.size()) <= n)
    cache.push_back(cache.back() * static_cast<int>(cache.size()));
  return cache[n];
}

double log_factorial(int n) {
  static std::vector<double> cache{0.0};
  while (static_cast<int>(cache.size()) <= n)
    cache.push_back(cache.back() + std::log(static_cast<double>(cache.size())));
  return cache[n];
}

void check_m_range(const TripleLM& t) {
  if (std::abs(t.m1) > t.l1 || std::abs(t.m2) > t.l2 || std::abs(t.m3) > t.l3)
    throw std::domain_error("wigner_3j: |m| exceeds l");
}

bool selection_ok(const TripleLM& t) {
  return t.m1 + t.m2 + t.m3 == 0 && triangle_ok(t.l1, t.l2, t.l3);
}

// Racah sum in double precision with compensated summation. Reliable when
// the alternating sum has little cancellation (few terms, or boundary m's);
// the general fast path goes through the m-recursion instead.
double racah_3j_double(const TripleLM& t) {
  const int l1 = t.l1, l2 = t.l2, l3 = t.l3;
  const int m1 = t.m1, m2 = t.m2, m3 = t.m3;
  const int tmin = std::max({0, l2 - l3 - m1, l1 - l3 + m2});
  const int tmax = std::min({l1 + l2 - l3, l1 - m1, l2 + m2});
  if (tmin > tmax) return 0.0;
  const double logpref =
      0.5 * (log_factorial(l1 + l2 - l3) + log_factorial(l1 - l2 + l3) +
             log_factorial(-l1 + l2 + l3) - log_factorial(l1 + l2 + l3 + 1) +
             log_factorial(l1 + m1) + log_factorial(l1 - m1) +
             log_factorial(l2 + m2) + log_factorial(l2 - m2) +
             log_factorial(l3 + m3) + log_factorial(l3 - m3));
  double sum = 0.0, comp = 0.0;
  for (int z = tmin; z <= tmax; ++z) {
    const double logterm =
        logpref - log_factorial(z) - log_factorial(l1 + l2 - l3 - z) -
        log_factorial(l1 - m1 - z) - log_factorial(l2 + m2 - z) -
        log_factorial(l3 - l2 + m1 + z) - log_factorial(l3 - l1 - m2 + z);
    const double term = ((z & 1) ? -1.0 : 1.0) * std::exp(logterm);
    const double y = term - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  const int phase = l1 - l2 - m3;
  return (phase & 1) ? -sum : sum;
}

}  // namespace

double wigner_3j_exact(const TripleLM& t) {
  check_m_range(t);
  if (!selection_ok(t)) return 0.0;
  const int l1 = t.l1, l2 = t.l2, l3 = t.l3;
  const int m1 = t.m1, m2 = t.m2, m3 = t.m3;
  const int tmin = std::max({0, l2 - l3 - m1, l1 - l3 + m2});
  const int tmax = std::min({l1 + l2 - l3, l1 - m1, l2 + m2});
  if (tmin > tmax) return 0.0;
  BigRat sum = 0;
  for (int z = tmin; z <= tmax; ++z) {
    BigInt den = big_factorial(z) * big_factorial(l1 + l2 - l3 - z) *
                 big_factorial(l1 - m1 - z) * big_factorial(l2 + m2 - z) *
                 big_factorial(l3 - l2 + m1 + z) *
                 big_factorial(l3 - l1 - m2 + z);
    BigRat term(1, den);
    if (z & 1) sum -= term;
    else sum += term;
  }
  if (sum == 0) return 0.0;
  BigRat pref(big_factorial(l1 + l2 - l3) * big_factorial(l1 - l2 + l3) *
                  big_factorial(-l1 + l2 + l3) * big_factorial(l1 + m1) *
                  big_factorial(l1 - m1) * big_factorial(l2 + m2) *
                  big_factorial(l2 - m2) * big_factorial(l3 + m3) *
                  big_factorial(l3 - m3),
              big_factorial(l1 + l2 + l3 + 1));
  BigFloat value = BigFloat(sum) * sqrt(BigFloat(pref));
  if ((l1 - l2 - m3) & 1) value = -value;
  return static_cast<double>(value);
}

double wigner_3j_zero(int l1, int l2, int l3) {
  if (l1 < 0 || l2 < 0 || l3 < 0 || !triangle_ok(l1, l2, l3)) return 0.0;
  const int J = l1 + l2 + l3;
  if (J & 1) return 0.0;
  const int g = J / 2;
  // 8.1.2.12/8.5.2.32 closed form, evaluated in logs (single term, no
  // cancellation).
  const double logval =
      log_factorial(g) - log_factorial(g - l1) - log_factorial(g - l2) -
      log_factorial(g - l3) +
      0.5 * (log_factorial(J - 2 * l1) + log_factorial(J - 2 * l2) +
             log_factorial(J - 2 * l3) - log_factorial(J + 1));
  const double value = std::exp(logval);
  return (g & 1) ? -value : value;
}

Wigner3jRow wigner_3j_row(int l1, int l2, int l3, int m1) {
  if (std::abs(m1) > l1) throw std::domain_error("wigner_3j_row: |m1| > l1");
  Wigner3jRow row;
  if (!triangle_ok(l1, l2, l3)) return row;
  const int m2_min = std::max(-l2, -l3 - m1);
  const int m2_max = std::min(l2, l3 - m1);
  if (m2_min > m2_max) return row;
  row.m2_min = m2_min;
  const int n = m2_max - m2_min + 1;
  row.values.assign(n, 0.0);

  auto alpha = [&](int m2) {
    const int m3 = -m1 - m2;
    return std::sqrt(double(l2 - m2) * (l2 + m2 + 1) * (l3 + m3) *
                     (l3 - m3 + 1));
  };
  auto beta = [&](int m2) {
    const int m3 = -m1 - m2;
    return double(l2) * (l2 + 1) + double(l3) * (l3 + 1) -
           double(l1) * (l1 + 1) + 2.0 * m2 * m3;
  };

  if (n == 1) {
    row.values[0] = 1.0;
  } else {
    // Two-sided recursion. The forward sweep is stable only while the step
    // ratio beta/alpha keeps shrinking; once it stagnates the sweep has
    // crossed the turning point and the unwanted solution takes over, so we
    // stop there, run the backward sweep down to the stop point, and splice
    // the two with a least-squares ratio over three overlapping entries.
    std::vector<double> fwd(n);
    fwd[0] = 1.0;
    fwd[1] = -beta(m2_min) / alpha(m2_min);
    double c1_prev = std::abs(fwd[1]);
    int kstop = n - 1;
    for (int k = 1; k + 1 < n; ++k) {
      const int m2 = m2_min + k;
      const double c1 = beta(m2) / alpha(m2);
      fwd[k + 1] = -(c1 * fwd[k] + alpha(m2 - 1) / alpha(m2) * fwd[k - 1]);
      if (std::abs(fwd[k + 1]) > 1e150)
        for (int j = 0; j <= k + 1; ++j) fwd[j] *= 1e-150;
      if (k + 1 >= 3 && std::abs(c1) >= c1_prev) {
        kstop = k + 1;
        break;
      }
      c1_prev = std::abs(c1);
    }
    if (kstop == n - 1) {
      row.values = fwd;
    } else {
      std::vector<double> bwd(n, 0.0);
      bwd[n - 1] = 1.0;
      bwd[n - 2] = -beta(m2_max) / alpha(m2_max - 1);
      for (int k = n - 2; k - 1 >= kstop - 2; --k) {
        const int m2 = m2_min + k;
        bwd[k - 1] =
            -(beta(m2) * bwd[k] + alpha(m2) * bwd[k + 1]) / alpha(m2 - 1);
        if (std::abs(bwd[k - 1]) > 1e150)
          for (int j = k - 1; j < n; ++j) bwd[j] *= 1e-150;
      }
      double fmax = 0.0, bmax = 0.0;
      for (int k = 0; k <= kstop; ++k) fmax = std::max(fmax, std::abs(fwd[k]));
      for (int k = kstop - 2; k < n; ++k)
        bmax = std::max(bmax, std::abs(bwd[k]));
      for (int k = 0; k <= kstop; ++k) fwd[k] /= fmax;
      for (int k = kstop - 2; k < n; ++k) bwd[k] /= bmax;
      const double x1 = fwd[kstop - 2], x2 = fwd[kstop - 1], x3 = fwd[kstop];
      const double ratio =
          (x1 * bwd[kstop - 2] + x2 * bwd[kstop - 1] + x3 * bwd[kstop]) /
          (x1 * x1 + x2 * x2 + x3 * x3);
      for (int k = 0; k < n; ++k)
        row.values[k] = (k < kstop - 2) ? ratio * fwd[k] : bwd[k];
    }
  }

  // Normalize: sum over m2 of 3j^2 (third argument forced) is 1/(2l1+1).
  double norm = 0.0;
  for (double v : row.values) norm += v * v;
  const double target = 1.0 / (2.0 * l1 + 1.0);
  const double s = std::sqrt(target / norm);
  // Sign from the boundary value, whose Racah sum has a single term.
  const double boundary =
      racah_3j_double({l1, l2, l3, m1, m2_max, -m1 - m2_max});
  double sign = (boundary < 0) == (row.values[n - 1] < 0) ? 1.0 : -1.0;
  if (boundary == 0.0) sign = 1.0;
  for (double& v : row.values) v *= s * sign;
  return row;
}

double Wigner3jRow::at(int m2) const {
  const int k = m2 - m2_min;
  if (k < 0 || k >= static_cast<int>(values.size())) return 0.0;
  return values[k];
}

double wigner_3j(const TripleLM& t) {
  check_m_range(t);
  if (!selection_ok(t)) return 0.0;
  // zero-row symbols vanish identically at odd total order
  if (t.m1 == 0 && t.m2 == 0 && t.m3 == 0 && (t.l1 + t.l2 + t.l3) % 2 != 0)
    return 0.0;
  // Few-term Racah sums are cancellation-free; otherwise go through the
  // stable row recursion.
  const int tmin = std::max({0, t.l2 - t.l3 - t.m1, t.l1 - t.l3 + t.m2});
  const int tmax = std::min({t.l1 + t.l2 - t.l3, t.l1 - t.m1, t.l2 + t.m2});
  if (tmax - tmin <= 2) return racah_3j_double(t);
  return wigner_3j_row(t.l1, t.l2, t.l3, t.m1).at(t.m2);
}

namespace {

bool sixj_triangles_ok(const SixJArguments& s) {
  return triangle_ok(s.a, s.b, s.c) && triangle_ok(s.c, s.d, s.e) &&
         triangle_ok(s.a, s.e, s.f) && triangle_ok(s.b, s.d, s.f);
}

BigRat triangle_coeff(int a, int b, int c) {
  return BigRat(big_factorial(a + b - c) * big_factorial(a - b + c) *
                    big_factorial(-a + b + c),
                big_factorial(a + b + c + 1));
}

}  // namespace

double wigner_6j_exact(const SixJArguments& s) {
  if (s.a < 0 || s.b < 0 || s.c < 0 || s.d < 0 || s.e < 0 || s.f < 0)
    throw std::domain_error("wigner_6j: negative argument");
  if (!sixj_triangles_ok(s)) return 0.0;
  // Racah single-sum formula; triangles (abc), (cde), (aef), (bdf).
  const int a = s.a, b = s.b, c = s.c, d = s.d, e = s.e, f = s.f;
  const int t1 = a + b + c, t2 = c + d + e, t3 = a + e + f, t4 = b + d + f;
  const int q1 = a + b + d + e, q2 = b + c + e + f, q3 = a + c + d + f;
  const int tmin = std::max({t1, t2, t3, t4});
  const int tmax = std::min({q1, q2, q3});
  BigRat sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    BigRat term(big_factorial(t + 1),
                big_factorial(t - t1) * big_factorial(t - t2) *
                    big_factorial(t - t3) * big_factorial(t - t4) *
                    big_factorial(q1 - t) * big_factorial(q2 - t) *
                    big_factorial(q3 - t));
    if (t & 1) sum -= term;
    else sum += term;
  }
  if (sum == 0) return 0.0;
  BigRat pref = triangle_coeff(a, b, c) * triangle_coeff(c, d, e) *
                triangle_coeff(a, e, f) * triangle_coeff(b, d, f);
  BigFloat value = BigFloat(sum) * sqrt(BigFloat(pref));
  return static_cast<double>(value);
}

double wigner_6j(const SixJArguments& s) { return wigner_6j_exact(s); }

double wigner_6j_bruteforce(const SixJArguments& s) {
  if (!sixj_triangles_ok(s)) return 0.0;
  // Contraction of four 3j symbols over all orders; {a b c; d e f} couples
  // the triads (abc), (dec), (aef), (dbf).
  const int a = s.a, b = s.b, c = s.c, d = s.d, e = s.e, f = s.f;
  double sum = 0.0;
  for (int al = -a; al <= a; ++al)
    for (int be = -b; be <= b; ++be) {
      const int ep = -(al + be);
      if (std::abs(ep) > c) continue;
      for (int ga = -d; ga <= d; ++ga) {
        const int de = ep - ga;
        if (std::abs(de) > e) continue;
        const int ph = al + de;
        if (std::abs(ph) > f) continue;
        if (ga + be + ph != 0) continue;
        double term = wigner_3j({a, b, c, al, be, ep}) *
                      wigner_3j({d, e, c, ga, de, -ep}) *
                      wigner_3j({a, e, f, al, de, -ph}) *
                      wigner_3j({d, b, f, ga, be, ph});
        if ((c + f + ep + ph) & 1) term = -term;
        sum += term;
      }
    }
  return sum;
}

double gaunt(const TripleLM& t) {
  check_m_range(t);
  if (!selection_ok(t)) return 0.0;
  if ((t.l1 + t.l2 + t.l3) & 1) return 0.0;
  const double h = std::sqrt((2.0 * t.l1 + 1) * (2.0 * t.l2 + 1) *
                             (2.0 * t.l3 + 1) / (4.0 * M_PI));
  return h * wigner_3j_zero(t.l1, t.l2, t.l3) * wigner_3j(t);
}

const Wigner3jRow& WignerRowCache::row(int l1, int l2, int l3, int m1) {
  const std::array<int, 4> key{l1, l2, l3, m1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;
  if (frozen_)
    throw std::logic_error("WignerRowCache: miss on frozen cache");
  return rows_.emplace(key, wigner_3j_row(l1, l2, l3, m1)).first->second;
}

void WignerRowCache::warm_up(int l1, int l2, int l3) {
  for (int m1 = -l1; m1 <= l1; ++m1) row(l1, l2, l3, m1);
}

}  // namespace spherebispec
