#pragma once

#include <vector>

#include "fractal/blocks.hpp"
#include "fractal/numeric.hpp"
#include "fractal/rng.hpp"
#include "fractal/scales.hpp"

namespace fractal {

/// Convex decomposition of the marginal vector y_u = T p(u) into admissible
/// subsets: each atom S has #S = T and meets every cell of both partitions at
/// most once; sum_S w_S 1_S(u) = T p(u) exactly.
struct SamplingDistribution {
  std::vector<Pt> ground;
  long long T = 0;
  std::vector<std::pair<std::vector<int>, Rat>> atoms;  // (sorted element indices, weight)
  size_t arc_count = 0;  // arcs of the underlying flow network

  std::vector<Pt> atom_points(size_t i) const;
  /// sum_S w_S 1_S(u), as an exact rational, for ground element index u.
  Rat marginal(int u) const;
};

/// Unit-capacity network s -> B-cells -> elements -> R-cells -> t used by the
/// decomposition; exposed for inspection and tests.
struct FlowNetwork {
  std::vector<std::vector<int>> cells_b;  // element indices per B-cell
  std::vector<std::vector<int>> cells_r;  // element indices per R-cell
  std::vector<int> cell_b_of;             // element -> B-cell
  std::vector<int> cell_r_of;             // element -> R-cell
  size_t arc_count() const;
};

FlowNetwork build_flow_network(size_t ground_size, const std::vector<std::vector<int>>& cells_b,
                               const std::vector<std::vector<int>>& cells_r);

/// Vertex peeling over the two-partition flow polytope. `p` are the one-point
/// masses (sum 1); preconditions: cell sums of T*p at most 1 for both
/// partitions, T <= #ground.
SamplingDistribution two_partition_decompose(const std::vector<Pt>& ground,
                                             const std::vector<std::vector<int>>& cells_b,
                                             const std::vector<std::vector<int>>& cells_r,
                                             long long T, const std::vector<Rat>& p);

/// Convenience overload: cells from block partitions of the ground set.
SamplingDistribution two_partition_decompose(const std::vector<Pt>& ground,
                                             const BlockPartition& part_b,
                                             const BlockPartition& part_r, long long T,
                                             const std::vector<Rat>& p);

std::vector<Pt> two_partition_draw(const SamplingDistribution& dist, SplitRng& rng);

}  // namespace fractal
