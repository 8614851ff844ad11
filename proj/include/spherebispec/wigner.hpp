#pragma once
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

// Wigner 3j/6j symbols and Gaunt factors.
//
// Two evaluation routes are provided on purpose:
//  - a floating-point fast path (stable m-recursion for rows, Racah sum for
//    single symbols), used by the estimator loops;
//  - an exact-rational Racah evaluation (wigner_3j_exact / wigner_6j_exact),
//    used as the conformance oracle in the test suites.
// Selection-rule violations return 0.0; only |m| > l is treated as an error.

namespace spherebispec {

struct TripleLM {
  int l1, l2, l3;
  int m1, m2, m3;
  bool admissible() const;
};

struct SixJArguments {
  int a, b, c, d, e, f;
};

// true iff l_i <= l_j + l_k for every permutation (all arguments >= 0)
bool triangle_ok(int l1, int l2, int l3);

// 3j symbol, floating fast path. Throws std::domain_error if |m_i| > l_i.
double wigner_3j(const TripleLM& t);

// 3j symbol, exact-rational Racah sum rounded to double.
double wigner_3j_exact(const TripleLM& t);

// Closed form for (l1 l2 l3; 0 0 0); exactly 0.0 for odd l1+l2+l3.
double wigner_3j_zero(int l1, int l2, int l3);

// All 3j(l1,l2,l3; m1,m2,-m1-m2) for m2 in [max(-l2,-l3-m1), min(l2,l3-m1)].
// Empty when the range is empty or the triangle fails.
struct Wigner3jRow {
  int m2_min = 0;
  std::vector<double> values;  // values[k] at m2 = m2_min + k
  double at(int m2) const;
};
Wigner3jRow wigner_3j_row(int l1, int l2, int l3, int m1);

// 6j symbol. Exact-rational Racah evaluation rounded to double.
double wigner_6j(const SixJArguments& s);
double wigner_6j_exact(const SixJArguments& s);

// 6j via brute-force contraction of four 3j symbols (the defining sum);
// intended for small arguments only.
double wigner_6j_bruteforce(const SixJArguments& s);

// Gaunt factor sqrt((2l1+1)(2l2+1)(2l3+1)/4pi) * 3j(0-row) * 3j(m-row).
double gaunt(const TripleLM& t);

// Caller-owned memoization of 3j rows keyed by (l1,l2,l3,m1). Build the
// cache single-threaded (or via warm_up), then freeze() for concurrent reads.
class WignerRowCache {
 public:
  const Wigner3jRow& row(int l1, int l2, int l3, int m1);
  void warm_up(int l1, int l2, int l3);  // all m1 in [-l1, l1]
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::map<std::array<int, 4>, Wigner3jRow> rows_;
  bool frozen_ = false;
};

}  // namespace spherebispec
