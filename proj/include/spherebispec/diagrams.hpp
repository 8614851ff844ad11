#pragma once

#include <array>
#include <utility>
#include <vector>

namespace spherebispec {

// Perfect matching of the cells of a 2p x 3 grid. Cells are numbered
// row * 3 + column; edges are stored as (a, b) with a < b, sorted by a.
struct Diagram {
  int p = 0;
  std::vector<std::pair<int, int>> edges;

  int rows() const { return 2 * p; }
  int cells() const { return 6 * p; }
};

struct DiagramClass {
  bool has_flat_edge = false;
  bool connected = false;
  bool paired = false;
  int min_loop_order = 0;  // 1 = flat edge; 0 only if no loop exists
};

// All (6p-1)!! matchings; p >= 3 is refused (resource guard).
std::vector<Diagram> enumerate_diagrams(int p);

DiagramClass classify(const Diagram& d);

// Value of one Wick pairing: nested m-sums of products of 3j symbols with
// the per-edge (-1)^m sign; edges joining columns that carry different l
// make the whole term vanish. Guarded to max(l) <= 6.
double diagram_value(const Diagram& d, int l1, int l2, int l3);

// Sum of diagram_value over all diagrams: exact E I^{2p} under Gaussianity.
double moment_bruteforce(int p, int l1, int l2, int l3);

// Sum over paired diagrams only; equals (2p-1)!! * Delta^p.
double paired_family_value(int p, int l1, int l2, int l3);

enum class LoopKind { two_loop, three_loop };

// Checks the loop-reduction identity on one diagram. loop_rows picks the
// rows forming the loop (the reduction is not unique, so the caller chooses).
// Returns (value of d, reduction factor times value of the reduced diagram).
std::pair<double, double> verify_loop_reduction(const Diagram& d,
                                                LoopKind kind,
                                                const std::vector<int>& loop_rows,
                                                int l1, int l2, int l3);

}  // namespace spherebispec
