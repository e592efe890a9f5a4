#include "fractal/flow.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "fractal/errors.hpp"

namespace fractal {

namespace {

// Small BFS/DFS max-flow (Dinic) on integer capacities.
struct MaxFlow {
  struct Edge {
    int to;
    long long cap;
    int rev;
  };
  std::vector<std::vector<Edge>> g;
  std::vector<int> level, iter;

  explicit MaxFlow(int n) : g(n) {}

  int add_edge(int from, int to, long long cap) {
    g[from].push_back({to, cap, static_cast<int>(g[to].size())});
    g[to].push_back({from, 0, static_cast<int>(g[from].size()) - 1});
    return static_cast<int>(g[from].size()) - 1;
  }

  bool bfs(int s, int t) {
    level.assign(g.size(), -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& e : g[v])
        if (e.cap > 0 && level[e.to] < 0) {
          level[e.to] = level[v] + 1;
          q.push(e.to);
        }
    }
    return level[t] >= 0;
  }

  long long dfs(int v, int t, long long f) {
    if (v == t) return f;
    for (int& i = iter[v]; i < static_cast<int>(g[v].size()); ++i) {
      Edge& e = g[v][i];
      if (e.cap > 0 && level[v] < level[e.to]) {
        long long d = dfs(e.to, t, std::min(f, e.cap));
        if (d > 0) {
          e.cap -= d;
          g[e.to][e.rev].cap += d;
          return d;
        }
      }
    }
    return 0;
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      iter.assign(g.size(), 0);
      long long f;
      while ((f = dfs(s, t, 1LL << 60)) > 0) flow += f;
    }
    return flow;
  }
};

}  // namespace

size_t FlowNetwork::arc_count() const {
  return cells_b.size() + cell_b_of.size() + cells_r.size();
}

FlowNetwork build_flow_network(size_t ground_size, const std::vector<std::vector<int>>& cells_b,
                               const std::vector<std::vector<int>>& cells_r) {
  FlowNetwork net;
  net.cells_b = cells_b;
  net.cells_r = cells_r;
  net.cell_b_of.assign(ground_size, -1);
  net.cell_r_of.assign(ground_size, -1);
  for (size_t c = 0; c < cells_b.size(); ++c)
    for (int u : cells_b[c]) {
      if (u < 0 || u >= static_cast<int>(ground_size) || net.cell_b_of[u] != -1)
        throw NotAPartition("B-cells");
      net.cell_b_of[u] = static_cast<int>(c);
    }
  for (size_t c = 0; c < cells_r.size(); ++c)
    for (int u : cells_r[c]) {
      if (u < 0 || u >= static_cast<int>(ground_size) || net.cell_r_of[u] != -1)
        throw NotAPartition("R-cells");
      net.cell_r_of[u] = static_cast<int>(c);
    }
  for (size_t u = 0; u < ground_size; ++u)
    if (net.cell_b_of[u] < 0 || net.cell_r_of[u] < 0) throw NotAPartition("uncovered element");
  return net;
}

std::vector<Pt> SamplingDistribution::atom_points(size_t i) const {
  std::vector<Pt> out;
  for (int u : atoms[i].first) out.push_back(ground[u]);
  return out;
}

Rat SamplingDistribution::marginal(int u) const {
  Rat out(0);
  for (const auto& [idx, w] : atoms)
    if (std::binary_search(idx.begin(), idx.end(), u)) out += w;
  return out;
}

namespace {

/// Integral vertex g of the polytope face containing y: agrees with y on
/// integral coordinates and saturates every tight cell constraint.
std::vector<char> integral_vertex(const FlowNetwork& net, const std::vector<Rat>& y,
                                  long long T) {
  size_t n = y.size();
  size_t nb = net.cells_b.size(), nr = net.cells_r.size();
  std::vector<char> g(n, 0);
  std::vector<Rat> sum_b(nb, Rat(0)), sum_r(nr, Rat(0));
  std::vector<char> used_b(nb, 0), used_r(nr, 0);
  long long fixed = 0;
  for (size_t u = 0; u < n; ++u) {
    sum_b[net.cell_b_of[u]] += y[u];
    sum_r[net.cell_r_of[u]] += y[u];
    if (y[u] == 1) {
      g[u] = 1;
      used_b[net.cell_b_of[u]] = 1;
      used_r[net.cell_r_of[u]] = 1;
      ++fixed;
    }
  }
  long long K = T - fixed;
  // Flow with lower bounds: s -> B-cell (lb 1 if tight), element arcs,
  // R-cell -> t (lb 1 if tight), t -> s with lb = ub = K.
  int S = 0, Tn = 1, base_b = 2, base_r = base_b + static_cast<int>(nb);
  int SS = base_r + static_cast<int>(nr), TT = SS + 1;
  MaxFlow mf(TT + 1);
  std::vector<long long> excess(TT + 1, 0);
  auto arc = [&](int a, int b, long long lb, long long ub) {
    int id = mf.add_edge(a, b, ub - lb);
    excess[b] += lb;
    excess[a] -= lb;
    return id;
  };
  for (size_t c = 0; c < nb; ++c)
    if (!used_b[c]) arc(S, base_b + static_cast<int>(c), sum_b[c] == 1 ? 1 : 0, 1);
  for (size_t c = 0; c < nr; ++c)
    if (!used_r[c]) arc(base_r + static_cast<int>(c), Tn, sum_r[c] == 1 ? 1 : 0, 1);
  std::vector<int> elem_edge(n, -1);
  for (size_t u = 0; u < n; ++u)
    if (y[u] != 0 && y[u] != 1)
      elem_edge[u] = arc(base_b + net.cell_b_of[u], base_r + net.cell_r_of[u], 0, 1);
  arc(Tn, S, K, K);
  long long need = 0;
  for (int v = 0; v <= TT; ++v) {
    if (v == SS || v == TT) continue;
    if (excess[v] > 0) {
      mf.add_edge(SS, v, excess[v]);
      need += excess[v];
    } else if (excess[v] < 0) {
      mf.add_edge(v, TT, -excess[v]);
    }
  }
  if (mf.run(SS, TT) != need)
    throw InfeasibleMarginals("no integral vertex on the current face");
  for (size_t u = 0; u < n; ++u)
    if (elem_edge[u] >= 0) {
      const auto& e = mf.g[base_b + net.cell_b_of[u]][elem_edge[u]];
      if (e.cap == 0) g[u] = 1;  // saturated unit arc
    }
  return g;
}

}  // namespace

SamplingDistribution two_partition_decompose(const std::vector<Pt>& ground,
                                             const std::vector<std::vector<int>>& cells_b,
                                             const std::vector<std::vector<int>>& cells_r,
                                             long long T, const std::vector<Rat>& p) {
  size_t n = ground.size();
  if (p.size() != n) throw ValidationError("p size mismatch");
  if (T < 1 || static_cast<size_t>(T) > n) throw ValidationError("T out of range");
  if (std::accumulate(p.begin(), p.end(), Rat(0)) != 1) throw ValidationError("sum p != 1");
  FlowNetwork net = build_flow_network(n, cells_b, cells_r);

  std::vector<Rat> y(n);
  for (size_t u = 0; u < n; ++u) {
    y[u] = Rat(T) * p[u];
    if (y[u] < 0 || y[u] > 1) throw InfeasibleMarginals("element marginal outside [0,1]");
  }
  for (const auto& cells : {cells_b, cells_r})
    for (const auto& cell : cells) {
      Rat s(0);
      for (int u : cell) s += y[u];
      if (s > 1) throw InfeasibleMarginals("cell sum of T*p exceeds 1");
    }

  SamplingDistribution dist;
  dist.ground = ground;
  dist.T = T;
  dist.arc_count = net.arc_count();

  Rat w_rem(1);
  for (size_t round = 0; round <= dist.arc_count + 1; ++round) {
    bool integral = true;
    for (const auto& v : y)
      if (v != 0 && v != 1) {
        integral = false;
        break;
      }
    if (integral) {
      std::vector<int> idx;
      for (size_t u = 0; u < n; ++u)
        if (y[u] == 1) idx.push_back(static_cast<int>(u));
      dist.atoms.push_back({std::move(idx), w_rem});
      return dist;
    }
    std::vector<char> g = integral_vertex(net, y, T);
    Rat lambda(1);
    for (size_t u = 0; u < n; ++u) {
      if (y[u] == 0 || y[u] == 1) continue;
      lambda = std::min(lambda, g[u] ? y[u] : Rat(1 - y[u]));
    }
    std::vector<Rat> sum_b(net.cells_b.size(), Rat(0)), sum_r(net.cells_r.size(), Rat(0));
    std::vector<char> hit_b(net.cells_b.size(), 0), hit_r(net.cells_r.size(), 0);
    for (size_t u = 0; u < n; ++u) {
      sum_b[net.cell_b_of[u]] += y[u];
      sum_r[net.cell_r_of[u]] += y[u];
      if (g[u]) {
        hit_b[net.cell_b_of[u]] = 1;
        hit_r[net.cell_r_of[u]] = 1;
      }
    }
    for (size_t c = 0; c < sum_b.size(); ++c)
      if (!hit_b[c]) lambda = std::min(lambda, Rat(1 - sum_b[c]));
    for (size_t c = 0; c < sum_r.size(); ++c)
      if (!hit_r[c]) lambda = std::min(lambda, Rat(1 - sum_r[c]));
    if (lambda <= 0) throw InfeasibleMarginals("stalled peeling step");
    std::vector<int> idx;
    for (size_t u = 0; u < n; ++u)
      if (g[u]) idx.push_back(static_cast<int>(u));
    dist.atoms.push_back({std::move(idx), w_rem * lambda});
    if (lambda == 1) return dist;
    for (size_t u = 0; u < n; ++u) y[u] = (y[u] - (g[u] ? lambda : Rat(0))) / (1 - lambda);
    w_rem *= 1 - lambda;
  }
  throw InfeasibleMarginals("peeling exceeded arc bound");
}

SamplingDistribution two_partition_decompose(const std::vector<Pt>& ground,
                                             const BlockPartition& part_b,
                                             const BlockPartition& part_r, long long T,
                                             const std::vector<Rat>& p) {
  auto cells_of = [&](const BlockPartition& bp) {
    std::map<Pt, std::vector<int>> by_cell;
    for (size_t u = 0; u < ground.size(); ++u)
      by_cell[block_cell_id(bp, ground[u])].push_back(static_cast<int>(u));
    std::vector<std::vector<int>> cells;
    for (auto& [id, v] : by_cell) cells.push_back(std::move(v));
    return cells;
  };
  return two_partition_decompose(ground, cells_of(part_b), cells_of(part_r), T, p);
}

std::vector<Pt> two_partition_draw(const SamplingDistribution& dist, SplitRng& rng) {
  Rat x(Int(rng.next()), int_pow(2, 64));
  Rat acc(0);
  for (size_t i = 0; i < dist.atoms.size(); ++i) {
    acc += dist.atoms[i].second;
    if (x < acc) return dist.atom_points(i);
  }
  return dist.atom_points(dist.atoms.size() - 1);
}

}  // namespace fractal
