#pragma once

#include <map>
#include <utility>
#include <vector>

#include "fractal/numeric.hpp"

namespace fractal {

using Coord = long long;
using Pt = std::vector<Coord>;     // a digit or lattice vector in Z^d
using Word = std::vector<Pt>;      // digit string; Word[k] is the depth-(k+1) digit

/// Scale bookkeeping: factors M_1..M_N with exact prefix products
/// MM[n] = M_1 * ... * M_n (MM[0] = 1).
struct ScaleSequence {
  int d = 1;
  int r = 1;
  std::vector<Coord> M;
  std::vector<Int> MM;

  int depth() const { return static_cast<int>(M.size()); }
};

ScaleSequence make_scales(int d, int r, const std::vector<Coord>& M_list);

/// M_n = 2^(n0 + n) for n = 1..N.
std::vector<Coord> default_dyadic_schedule(int n0, int N);

struct CodingPoint {
  std::vector<Rat> x;        // sum_k w_k / MM[k]
  std::vector<Int> lattice;  // MM[|w|] * x, an integer vector
};

/// X(w) for a word of declared digit order s (digits in {0..s(M_k-1)}^d).
CodingPoint coding_point(const ScaleSequence& sc, const Word& w, int s);

/// The realized random tree: offspring sets with exact conditional edge masses.
struct OffspringAssignment {
  int order = 1;  // digit order s: children of a depth-(n-1) node lie in D_n^[s]
  int depth = 0;
  std::map<Word, std::map<Pt, Rat>> children;

  /// Registers a uniform offspring set (mass 1/#set each).
  void set_uniform(const Word& node, const std::vector<Pt>& set);
  void set_weighted(const Word& node, const std::map<Pt, Rat>& edge_mass);
};

struct TreeLeafSet {
  int depth = 0;
  std::vector<std::pair<Word, Rat>> leaves;  // (word, cylinder mass)
};

TreeLeafSet expand_tree(const ScaleSequence& sc, const OffspringAssignment& a, int n);

/// max over lattice points h of #{leaf words w : X(w) = h}; <= r^(d n).
Int max_lattice_multiplicity(const ScaleSequence& sc, const TreeLeafSet& leaves);

}  // namespace fractal
