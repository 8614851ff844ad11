#include "spherebispec/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "spherebispec/errors.hpp"
#include "spherebispec/wigner.hpp"

namespace spherebispec {

namespace {

void enumerate_rec(std::vector<char>& used, std::vector<std::pair<int, int>>& cur,
                   int ncells, std::vector<Diagram>& out, int p) {
  int a = 0;
  while (a < ncells && used[a]) ++a;
  if (a == ncells) {
    out.push_back({p, cur});
    return;
  }
  used[a] = 1;
  for (int b = a + 1; b < ncells; ++b) {
    if (used[b]) continue;
    used[b] = 1;
    cur.emplace_back(a, b);
    enumerate_rec(used, cur, ncells, out, p);
    cur.pop_back();
    used[b] = 0;
  }
  used[a] = 0;
}

// edge multiplicities between rows; [i][i] counts flat edges
std::vector<std::vector<int>> row_multigraph(const Diagram& d) {
  std::vector<std::vector<int>> cnt(d.rows(), std::vector<int>(d.rows(), 0));
  for (auto [a, b] : d.edges) {
    const int ra = a / 3, rb = b / 3;
    ++cnt[ra][rb];
    if (ra != rb) ++cnt[rb][ra];
  }
  return cnt;
}

int simple_girth(const std::vector<std::vector<int>>& cnt) {
  const int n = static_cast<int>(cnt.size());
  int best = 0;
  for (int s = 0; s < n; ++s) {
    // BFS shortest cycle through s
    std::vector<int> dist(n, -1), par(n, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        if (v == u || cnt[u][v] == 0) continue;
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          par[v] = u;
          q.push(v);
        } else if (v != par[u]) {
          const int len = dist[u] + dist[v] + 1;
          if (best == 0 || len < best) best = len;
        }
      }
    }
  }
  return best;
}

struct Evaluator {
  const Diagram& d;
  std::array<int, 3> ls;
  std::vector<int> partner;
  std::vector<int> mval;
  std::vector<char> assigned;
  std::vector<std::vector<double>> tab;  // 3j by (m at col 0, m at col 1)
  double total = 0.0;

  Evaluator(const Diagram& diag, int l1, int l2, int l3)
      : d(diag), ls{l1, l2, l3}, partner(d.cells(), -1), mval(d.cells(), 0),
        assigned(d.cells(), 0) {
    for (auto [a, b] : d.edges) {
      partner[a] = b;
      partner[b] = a;
    }
    tab.assign(2 * ls[0] + 1, std::vector<double>(2 * ls[1] + 1, 0.0));
    for (int m1 = -ls[0]; m1 <= ls[0]; ++m1)
      for (int m2 = -ls[1]; m2 <= ls[1]; ++m2) {
        const int m3 = -m1 - m2;
        if (std::abs(m3) > ls[2]) continue;
        tab[m1 + ls[0]][m2 + ls[1]] =
            wigner_3j({ls[0], ls[1], ls[2], m1, m2, m3});
      }
  }

  bool columns_compatible() const {
    for (auto [a, b] : d.edges)
      if (ls[a % 3] != ls[b % 3]) return false;
    return true;
  }

  // Sets cell c and its partner; returns the edge sign factor, or 0 if c was
  // already assigned to a conflicting value.
  double place(int c, int m, bool& did) {
    if (assigned[c]) {
      did = false;
      return mval[c] == m ? 1.0 : 0.0;
    }
    did = true;
    assigned[c] = 1;
    mval[c] = m;
    const int q = partner[c];
    assigned[q] = 1;
    mval[q] = -m;
    return (m & 1) ? -1.0 : 1.0;
  }

  void unplace(int c) {
    assigned[c] = 0;
    assigned[partner[c]] = 0;
  }

  void rec(int r, double prod) {
    if (r == d.rows()) {
      total += prod;
      return;
    }
    const int c0 = 3 * r, c1 = c0 + 1, c2 = c0 + 2;
    const int lo0 = assigned[c0] ? mval[c0] : -ls[0];
    const int hi0 = assigned[c0] ? mval[c0] : ls[0];
    for (int m0 = lo0; m0 <= hi0; ++m0) {
      bool did0;
      const double s0 = place(c0, m0, did0);
      if (s0 != 0.0) {
        const int lo1 = assigned[c1] ? mval[c1] : -ls[1];
        const int hi1 = assigned[c1] ? mval[c1] : ls[1];
        for (int m1 = lo1; m1 <= hi1; ++m1) {
          bool did1;
          const double s1 = place(c1, m1, did1);
          if (s1 != 0.0) {
            const int m2 = -m0 - m1;
            if (std::abs(m2) <= ls[2]) {
              const double w = tab[m0 + ls[0]][m1 + ls[1]];
              if (w != 0.0) {
                bool did2;
                const double s2 = place(c2, m2, did2);
                if (s2 != 0.0) rec(r + 1, prod * w * s0 * s1 * s2);
                if (did2) unplace(c2);
              }
            }
          }
          if (did1) unplace(c1);
        }
      }
      if (did0) unplace(c0);
    }
  }
};

void check_guards(int p, int l1, int l2, int l3) {
  if (p < 1 || p > 2)
    throw guard_error("diagram oracle: p must be 1 or 2");
  if (l1 < 0 || l2 < 0 || l3 < 0 || std::max({l1, l2, l3}) > 6)
    throw guard_error("diagram oracle: multipoles limited to 0..6");
}

int row_of_new_cell(const std::vector<int>& row_map, int old_cell) {
  return row_map[old_cell / 3] * 3 + old_cell % 3;
}

}  // namespace

std::vector<Diagram> enumerate_diagrams(int p) {
  if (p < 1 || p > 2)
    throw guard_error("enumerate_diagrams: p must be 1 or 2");
  std::vector<Diagram> out;
  std::vector<char> used(6 * p, 0);
  std::vector<std::pair<int, int>> cur;
  enumerate_rec(used, cur, 6 * p, out, p);
  return out;
}

DiagramClass classify(const Diagram& d) {
  DiagramClass c;
  auto cnt = row_multigraph(d);
  const int n = d.rows();
  for (int i = 0; i < n; ++i)
    if (cnt[i][i] > 0) c.has_flat_edge = true;

  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v)
      if (v != u && cnt[u][v] > 0 && !seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
  }
  c.connected = !c.has_flat_edge && reached == n;

  c.paired = !c.has_flat_edge;
  for (int i = 0; i < n && c.paired; ++i) {
    int deg = 0, mate = -1;
    for (int v = 0; v < n; ++v)
      if (v != i && cnt[i][v] > 0) {
        ++deg;
        mate = v;
      }
    if (deg != 1 || cnt[i][mate] != 3) c.paired = false;
  }

  if (c.has_flat_edge) {
    c.min_loop_order = 1;
  } else {
    bool two = false;
    for (int i = 0; i < n && !two; ++i)
      for (int j = i + 1; j < n; ++j)
        if (cnt[i][j] >= 2) {
          two = true;
          break;
        }
    c.min_loop_order = two ? 2 : simple_girth(cnt);
  }
  return c;
}

double diagram_value(const Diagram& d, int l1, int l2, int l3) {
  check_guards(d.p, l1, l2, l3);
  Evaluator ev(d, l1, l2, l3);
  if (!ev.columns_compatible()) return 0.0;
  ev.rec(0, 1.0);
  return ev.total;
}

double moment_bruteforce(int p, int l1, int l2, int l3) {
  check_guards(p, l1, l2, l3);
  double sum = 0.0;
  for (const Diagram& d : enumerate_diagrams(p)) sum += diagram_value(d, l1, l2, l3);
  return sum;
}

double paired_family_value(int p, int l1, int l2, int l3) {
  check_guards(p, l1, l2, l3);
  double sum = 0.0;
  for (const Diagram& d : enumerate_diagrams(p))
    if (classify(d).paired) sum += diagram_value(d, l1, l2, l3);
  return sum;
}

std::pair<double, double> verify_loop_reduction(const Diagram& d, LoopKind kind,
                                                const std::vector<int>& loop_rows,
                                                int l1, int l2, int l3) {
  check_guards(d.p, l1, l2, l3);
  const DiagramClass cls = classify(d);
  auto cnt = row_multigraph(d);
  const std::array<int, 3> ls{l1, l2, l3};

  auto edges_between = [&](int ra, int rb) {
    std::vector<std::pair<int, int>> es;
    for (auto [a, b] : d.edges)
      if ((a / 3 == ra && b / 3 == rb) || (a / 3 == rb && b / 3 == ra))
        es.emplace_back(a, b);
    return es;
  };

  if (kind == LoopKind::two_loop) {
    if (!cls.connected || cls.min_loop_order != 2 || loop_rows.size() != 2)
      throw std::invalid_argument("verify_loop_reduction: not a 2-loop configuration");
    const int i1 = loop_rows[0], i2 = loop_rows[1];
    if (cnt[i1][i2] != 2)
      throw std::invalid_argument("verify_loop_reduction: chosen rows are not doubly linked");
    // dangling edges leaving the loop rows
    int c_i1 = -1, c_out1 = -1, c_i2 = -1, c_out2 = -1;
    for (auto [a, b] : d.edges) {
      const int ra = a / 3, rb = b / 3;
      if (ra == i1 && rb != i2 && rb != i1) { c_i1 = a; c_out1 = b; }
      if (rb == i1 && ra != i2 && ra != i1) { c_i1 = b; c_out1 = a; }
      if (ra == i2 && rb != i1 && rb != i2) { c_i2 = a; c_out2 = b; }
      if (rb == i2 && ra != i1 && ra != i2) { c_i2 = b; c_out2 = a; }
    }
    if (c_i1 < 0 || c_i2 < 0)
      throw std::invalid_argument("verify_loop_reduction: loop rows have no outgoing edges");
    const double factor = 1.0 / (2.0 * ls[c_i1 % 3] + 1.0);

    std::vector<int> row_map(d.rows(), -1);
    int next = 0;
    for (int r = 0; r < d.rows(); ++r)
      if (r != i1 && r != i2) row_map[r] = next++;
    Diagram red;
    red.p = d.p - 1;
    for (auto [a, b] : d.edges) {
      if (a / 3 == i1 || a / 3 == i2 || b / 3 == i1 || b / 3 == i2) continue;
      red.edges.emplace_back(row_of_new_cell(row_map, a),
                             row_of_new_cell(row_map, b));
    }
    int na = row_of_new_cell(row_map, c_out1), nb = row_of_new_cell(row_map, c_out2);
    red.edges.emplace_back(std::min(na, nb), std::max(na, nb));
    std::sort(red.edges.begin(), red.edges.end());
    return {diagram_value(d, l1, l2, l3), factor * diagram_value(red, l1, l2, l3)};
  }

  if (!cls.connected || cls.min_loop_order != 3 || loop_rows.size() != 3)
    throw std::invalid_argument("verify_loop_reduction: not a 3-loop configuration");
  const int i1 = loop_rows[0], i2 = loop_rows[1], i3 = loop_rows[2];
  if (cnt[i1][i2] != 1 || cnt[i2][i3] != 1 || cnt[i3][i1] != 1)
    throw std::invalid_argument("verify_loop_reduction: chosen rows do not form a 3-loop");
  auto in_loop = [&](int r) { return r == i1 || r == i2 || r == i3; };

  // merge i2 and i3 into i1: drop the loop edges, reattach the outgoing
  // edges of i2, i3 to i1 at their original columns
  std::vector<std::pair<int, int>> kept;       // edges untouched by the merge
  std::vector<std::pair<int, int>> reattach;   // (loop cell, outside cell)
  for (auto [a, b] : d.edges) {
    const int ra = a / 3, rb = b / 3;
    if (in_loop(ra) && in_loop(rb)) continue;  // loop edge, deleted
    if (in_loop(ra)) reattach.emplace_back(a, b);
    else if (in_loop(rb)) reattach.emplace_back(b, a);
    else kept.emplace_back(a, b);
  }
  if (reattach.size() != 3)
    throw std::invalid_argument("verify_loop_reduction: loop rows must each have one outgoing edge");
  int col_seen = 0;
  for (auto [c, out] : reattach) col_seen |= 1 << (c % 3);
  if (col_seen != 7)
    throw std::invalid_argument(
        "verify_loop_reduction: merged row needs one cell per column; pick another configuration");

  std::vector<int> row_map(d.rows(), -1);
  int next = 0;
  for (int r = 0; r < d.rows(); ++r)
    if (r == i1 || !in_loop(r)) row_map[r] = next++;
  Diagram red;
  red.p = d.p - 1;
  for (auto [a, b] : kept)
    red.edges.emplace_back(row_of_new_cell(row_map, a),
                           row_of_new_cell(row_map, b));
  for (auto [c, out] : reattach) {
    const int na = row_map[i1] * 3 + c % 3;
    const int nb = row_of_new_cell(row_map, out);
    red.edges.emplace_back(std::min(na, nb), std::max(na, nb));
  }
  std::sort(red.edges.begin(), red.edges.end());
  const double w6 = wigner_6j({l1, l2, l3, l1, l2, l3});
  return {diagram_value(d, l1, l2, l3), w6 * diagram_value(red, l1, l2, l3)};
}

}  // namespace spherebispec
