#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fractal/blocks.hpp"
#include "fractal/construct.hpp"
#include "fractal/measure.hpp"

namespace fractal {

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0;
  double tolerance = 0;
  std::string detail;
};

/// Experiment output: named scalars, per-scale series, and verdicts that each
/// carry their tolerance.
struct ExperimentReport {
  std::string name;
  std::string params_echo;  // resolved parameter document
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> scalars;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<Verdict> verdicts;

  void scalar(const std::string& key, double v) { scalars.push_back({key, v}); }
  void verdict(const std::string& key, bool pass, double value, double tol,
               const std::string& detail = "");
  bool all_pass() const;
  std::string to_json() const;
  /// One CSV per series: columns scale_index, scale, value.
  void write_csv(const std::string& dir) const;
};

struct BallSchedule {
  std::vector<std::vector<Rat>> centers;
  std::vector<Rat> radii;
};

/// Random atom centers of the deepest level plus the scale radii 1/MM_k.
BallSchedule default_ball_schedule(const MeasureFamily& fam, int n_centers, std::uint64_t seed);

/// Upper-regularity fit: C_sup = max mu_N(B(x,rho)) / rho^target, with the
/// verdict C_sup <= declared decided by exact rational comparison.
ExperimentReport frostman_fit(const MeasureFamily& fam, const Rat& target,
                              const BallSchedule& sched, const Rat& declared);

/// Lower bounds mu_n(B(x, r sqrt(d)/MM_k)) / rho^(exponent+eps) at the given
/// points; verdict: strictly positive minimum.
ExperimentReport lower_mass_check(const MeasureFamily& fam,
                                  const std::vector<std::vector<Rat>>& points,
                                  const Rat& exponent, const std::vector<Rat>& eps_list);

struct XiSpec {
  int per_annulus = 32;
  std::uint64_t seed = 0;
};

/// Dyadic-annulus profile of |xi|^exponent |mu^(xi)| for 1 <= |xi| <= den/2.
ExperimentReport fourier_decay_profile(const DiscreteMeasure& mu, const Rat& exponent,
                                       const XiSpec& spec, double declared_B);

/// sup over the level-n frequency net of MM_n^exponent |D_n(xi)|, per level.
/// The net is a uniform grid over [0, MM_n)^d, per-coordinate count
/// min(net_cap, ceil(MM_n^(1+alpha/2) * 16(r+1)d)).
std::vector<double> increment_sup(const MeasureFamily& fam, const Rat& exponent,
                                  long long net_cap);

/// Exceedance frequencies of the per-replica sup against the Hoeffding
/// envelope 4 #net exp(-B^2 prod T_k MM_n^-alpha / 16) + slack.
ExperimentReport increment_concentration(const std::vector<MeasureFamily>& replicas,
                                         const Rat& exponent, long long net_cap, double B,
                                         double slack = 0.05);

/// Per-node block sparsity of the realized offspring sets; kinds[m] applies to
/// the offspring of depth-m nodes.
ExperimentReport sparsity_certificate(const OffspringAssignment& a,
                                      const std::vector<BlockPartition>& kinds);

struct BohrPointSet {
  int m = 0;  // largest m with 4 MM_m <= c theta^n MM_n
  std::vector<LPt> points;
  Rat volume_lower;       // (A/4)^d prod Qb_k^d
  double min_separation;  // over per-coordinate values; > A/4 expected
};

/// The explicit resonance points sum_k L_k a_k restricted to the box
/// [-c theta^n MM_n, ...]^d, each certified against the Dirichlet distance
/// conditions for all k <= n.
BohrPointSet bohr_points(const RestrictionGeoBundle& b, int n, const Rat& c, const Rat& theta,
                         std::size_t max_points = 4096);

/// |(grid * eta)^(xi)| >= 2^-dn prod Mb_k^d/T_k at each xi, with the closed
/// Dirichlet-product form cross-checked against direct summation.
ExperimentReport resonance_check(const RestrictionGeoBundle& b, int n,
                                 const std::vector<LPt>& xi_list);

/// Fejer-windowed energies of the structured factor plus the exact Parseval
/// and Cauchy-Schwarz identities.
ExperimentReport wn_vn_energy(const RestrictionGeoBundle& b, int n, const Rat& c,
                              long long grid_points);

struct ExponentRegion {
  Rat alpha;
  Rat beta;
  int d = 1;
};

enum class RegionKind { Delta, Trap, Pent };

struct HalfPlane {
  Rat A, B, C;  // A a + B b <= C
};

std::vector<HalfPlane> region_halfplanes(const ExponentRegion& reg, RegionKind kind);
bool region_membership(const ExponentRegion& reg, RegionKind kind, const Rat& a, const Rat& b);
/// Vertices of the region, counterclockwise, exact.
std::vector<std::pair<Rat, Rat>> region_vertices(const ExponentRegion& reg, RegionKind kind);
/// Exact membership in the convex hull of the given vertices.
bool hull_membership(const std::vector<std::pair<Rat, Rat>>& verts, const Rat& a, const Rat& b);

/// C_{alpha,beta} = (1/p_{alpha,beta}, 1/p'_{alpha,beta}).
std::pair<Rat, Rat> critical_vertex(const ExponentRegion& reg);
Rat q_star(const ExponentRegion& reg);

/// Sharpness harness for the factorized measure: f_delta is the indicator of
/// the 2delta sup-norm neighborhood of supp(grid) - supp(grid); delta = m/den
/// at the deepest level. ia = 1/p, ib = 1/q. Schedule must be decreasing.
ExperimentReport conv_sharpness_geometric(const FactorizedMeasure& fm, const Rat& alpha,
                                          const Rat& beta, const Rat& ia, const Rat& ib,
                                          const std::vector<Int>& delta_nums,
                                          long long grid_points = 2048);

/// Sharpness harness for the heavy-core measure: f_delta = 1_B(0, 2delta),
/// with (mu * f_delta)(x) = mu(B(x, 2delta)) evaluated exactly.
ExperimentReport conv_sharpness_nongeometric(const HeavyCoreMeasure& hc, const Rat& alpha,
                                             const Rat& beta, const Rat& ia, const Rat& ib,
                                             const std::vector<Rat>& deltas,
                                             long long grid_points = 2048);

/// Exact certificates: core-ball lower bounds mu_n(B(x, r sqrt(d)/MM_n)) >=
/// c^n MM_n^-alpha at every realized core point, and the cylinder upper bound
/// tau([w]) <= r^-d|w| MM_|w|^-alpha at every tree node.
ExperimentReport heavy_core_certificate(const HeavyCoreMeasure& hc, const Rat& alpha);

/// Exact certificates for the factorized family: the convolution identity
/// grid * random = combined per level, block sparsity of the random factor in
/// both partitions and of the combined sets modulo the q_n blocks, and the
/// difference-set cardinality bound prod (2 Mt_k)^d.
ExperimentReport factorization_certificate(const FactorizedMeasure& fm);

/// Resonance-box sampling of |nu_n^| on the structured frequency windows;
/// verdict: strictly positive minimum per level.
ExperimentReport nongeo_resonance_certificate(const RestrictionNongeoFamily& fam,
                                              int xi_per_level, std::uint64_t seed);

ExperimentReport restriction_experiment_geo(const RestrictionGeoBundle& b, const Rat& alpha,
                                            const Rat& beta, const Rat& ia, const Rat& ib,
                                            const Rat& c, const Rat& theta);

ExperimentReport restriction_experiment_nongeo(const RestrictionNongeoFamily& fam,
                                               const Rat& alpha, const Rat& beta, const Rat& ia,
                                               const Rat& ib, int xi_per_level,
                                               std::uint64_t seed);

}  // namespace fractal
