#include "fractal/blocks.hpp"

#include <set>

#include "fractal/errors.hpp"

namespace fractal {

namespace {

Coord floor_div(Coord a, Coord b) {
  Coord d = a / b, r = a % b;
  return (r != 0 && (r < 0) != (b < 0)) ? d - 1 : d;
}

Coord mod_pos(Coord a, Coord m) {
  Coord r = a % m;
  return r < 0 ? r + m : r;
}

std::string pt_str(const Pt& p) {
  std::string s = "(";
  for (size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s + ")";
}

}  // namespace

BlockPartition BlockPartition::modular(Coord q, Coord Q) {
  if (q < 1 || Q < 1 || Q % q != 0) throw ModulusNotDivisible("q=" + std::to_string(q) + " Q=" + std::to_string(Q));
  return {Modular, q, Q};
}

Pt block_cell_id(const BlockPartition& bp, const Pt& u) {
  Pt id(u.size());
  for (size_t l = 0; l < u.size(); ++l)
    id[l] = bp.kind == BlockPartition::Plain ? floor_div(u[l], bp.q) : mod_pos(u[l], bp.Q) / bp.q;
  return id;
}

std::map<Pt, std::vector<Pt>> build_partition_blocks(const BlockPartition& bp,
                                                     const std::vector<Pt>& ground) {
  std::map<Pt, std::vector<Pt>> cells;
  for (const auto& u : ground) cells[block_cell_id(bp, u)].push_back(u);
  return cells;
}

bool is_block_sparse(const std::vector<Pt>& A, const BlockPartition& bp) {
  std::set<Pt> seen;
  for (const auto& u : A)
    if (!seen.insert(block_cell_id(bp, u)).second) return false;
  return true;
}

SumsetResult residue_separated_sum(const std::vector<Pt>& At, const std::vector<Pt>& Ab,
                                   Coord q, Coord Q) {
  if (Q % q != 0) throw ModulusNotDivisible();
  for (const auto& a : At)
    for (Coord c : a)
      if (mod_pos(c, Q) != 0) throw PreconditionViolated("At point " + pt_str(a) + " not in Q*Z^d");
  BlockPartition modular = BlockPartition::modular(q, Q);
  {
    std::map<Pt, Pt> seen;
    for (const auto& u : Ab) {
      auto [it, fresh] = seen.insert({block_cell_id(modular, u), u});
      if (!fresh)
        throw PreconditionViolated("Ab not q-block sparse mod Q: " + pt_str(it->second) + " and " + pt_str(u));
    }
  }
  SumsetResult out;
  std::set<Pt> sums;
  for (const auto& a : At)
    for (const auto& b : Ab) {
      Pt s(a.size());
      for (size_t l = 0; l < a.size(); ++l) s[l] = a[l] + b[l];
      if (!sums.insert(s).second) throw PreconditionViolated("sum collision at " + pt_str(s));
      out.sum.push_back(s);
      out.witness.push_back({a, b});
    }
  if (!is_block_sparse(out.sum, BlockPartition::plain(q)))
    throw PreconditionViolated("sumset not q-block sparse");
  return out;
}

}  // namespace fractal
