#pragma once

#include <map>
#include <string>
#include <vector>

#include "fractal/scales.hpp"

namespace fractal {

/// q-block partitions of Z^d: plain blocks b + {0..q-1}^d for b in qZ^d, or the
/// modular variant b + {0..q-1}^d + QZ^d for b in qZ^d intersected with [0,Q)^d.
struct BlockPartition {
  enum Kind { Plain, Modular } kind = Plain;
  Coord q = 1;
  Coord Q = 0;  // modulus, Modular only; requires q | Q

  static BlockPartition plain(Coord q) { return {Plain, q, 0}; }
  static BlockPartition modular(Coord q, Coord Q);
};

/// Identifier of the cell containing u.
Pt block_cell_id(const BlockPartition& bp, const Pt& u);

/// Groups a ground set into the partition's cells.
std::map<Pt, std::vector<Pt>> build_partition_blocks(const BlockPartition& bp,
                                                     const std::vector<Pt>& ground);

/// True iff every cell meets A at most once.
bool is_block_sparse(const std::vector<Pt>& A, const BlockPartition& bp);

struct SumsetResult {
  std::vector<Pt> sum;                       // all a~ + a-, guaranteed distinct
  std::vector<std::pair<Pt, Pt>> witness;    // witness[i] sums to sum[i]
};

/// Residue-separated addition: At subset of QZ^d, Ab q-block sparse mod Q.
/// Certifies bijectivity and q-block sparsity of the sumset.
SumsetResult residue_separated_sum(const std::vector<Pt>& At, const std::vector<Pt>& Ab,
                                   Coord q, Coord Q);

}  // namespace fractal
