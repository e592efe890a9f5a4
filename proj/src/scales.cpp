#include "fractal/scales.hpp"

#include "fractal/errors.hpp"

namespace fractal {

ScaleSequence make_scales(int d, int r, const std::vector<Coord>& M_list) {
  if (d < 1 || r < 1) throw ValidationError("d and r must be positive");
  if (M_list.empty()) throw ValidationError("empty scale list");
  ScaleSequence sc;
  sc.d = d;
  sc.r = r;
  sc.M = M_list;
  sc.MM.assign(M_list.size() + 1, Int(1));
  for (size_t n = 0; n < M_list.size(); ++n) {
    if (M_list[n] < 2) throw ScaleTooSmall("M_" + std::to_string(n + 1));
    if (n > 0 && M_list[n] <= M_list[n - 1])
      throw NonIncreasingScales("M_" + std::to_string(n + 1) + " <= M_" + std::to_string(n));
    sc.MM[n + 1] = sc.MM[n] * M_list[n];
  }
  return sc;
}

std::vector<Coord> default_dyadic_schedule(int n0, int N) {
  if (n0 < 1 || N < 1) throw ValidationError("n0 and N must be >= 1");
  if (n0 + N > 60) throw ValidationError("schedule exceeds 2^60");
  std::vector<Coord> M(N);
  for (int n = 1; n <= N; ++n) M[n - 1] = Coord(1) << (n0 + n);
  return M;
}

CodingPoint coding_point(const ScaleSequence& sc, const Word& w, int s) {
  if (static_cast<int>(w.size()) > sc.depth()) throw DepthExceedsScales();
  CodingPoint out;
  out.x.assign(sc.d, Rat(0));
  out.lattice.assign(sc.d, Int(0));
  const Int& full = sc.MM[w.size()];
  for (size_t k = 0; k < w.size(); ++k) {
    if (static_cast<int>(w[k].size()) != sc.d) throw DigitOutOfRange("wrong dimension");
    Coord hi = Coord(s) * (sc.M[k] - 1);
    Int stride = full / sc.MM[k + 1];
    for (int l = 0; l < sc.d; ++l) {
      if (w[k][l] < 0 || w[k][l] > hi)
        throw DigitOutOfRange("digit " + std::to_string(w[k][l]) + " at level " + std::to_string(k + 1));
      out.x[l] += Rat(Int(w[k][l]), sc.MM[k + 1]);
      out.lattice[l] += Int(w[k][l]) * stride;
    }
  }
  return out;
}

void OffspringAssignment::set_uniform(const Word& node, const std::vector<Pt>& set) {
  auto& kids = children[node];
  kids.clear();
  Rat mass(1, static_cast<long long>(set.size()));
  for (const auto& u : set) kids[u] = mass;
}

void OffspringAssignment::set_weighted(const Word& node, const std::map<Pt, Rat>& edge_mass) {
  children[node] = edge_mass;
}

TreeLeafSet expand_tree(const ScaleSequence& sc, const OffspringAssignment& a, int n) {
  if (n > sc.depth()) throw DepthExceedsScales();
  TreeLeafSet out;
  out.depth = n;
  out.leaves.push_back({Word{}, Rat(1)});
  for (int level = 1; level <= n; ++level) {
    std::vector<std::pair<Word, Rat>> next;
    for (const auto& [w, mass] : out.leaves) {
      auto it = a.children.find(w);
      if (it == a.children.end() || it->second.empty())
        throw MissingChildren("node at depth " + std::to_string(level - 1));
      for (const auto& [u, kappa] : it->second) {
        Word child = w;
        child.push_back(u);
        next.push_back({std::move(child), mass * kappa});
      }
    }
    out.leaves = std::move(next);
  }
  return out;
}

Int max_lattice_multiplicity(const ScaleSequence& sc, const TreeLeafSet& leaves) {
  std::map<std::vector<Int>, Int> count;
  for (const auto& [w, mass] : leaves.leaves) {
    if (static_cast<int>(w.size()) != leaves.depth) throw MixedDepths();
    count[coding_point(sc, w, sc.r).lattice] += 1;
  }
  Int best = 0;
  for (const auto& [pt, c] : count)
    if (c > best) best = c;
  return best;
}

}  // namespace fractal
