#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fractal/adsample.hpp"
#include "fractal/flow.hpp"
#include "fractal/measure.hpp"
#include "fractal/rng.hpp"
#include "fractal/scales.hpp"

namespace fractal {

/// Parameters for the five builders. Constant overrides default to the
/// reference values; the desk-scale preset shrinks them while keeping every
/// divisibility and identity intact.
struct ConstructionParams {
  std::string name;  // salem | heavy-core | geo-factorization | restriction-geo | restriction-nongeo
  int d = 1;
  int r = 2;
  Rat alpha = Rat(1, 2);
  Rat beta = Rat(1, 2);
  Rat s_exp = Rat(0);  // heavy core branching exponent s
  int depth = 3;
  std::vector<Coord> schedule;  // explicit M list (optional)
  Coord M0 = 0;                 // geo factorization: M_n = M0 + n
  Coord R0 = 0;                 // restriction-geo: R_n = R0 + n
  std::uint64_t seed = 0;
  std::string preset;

  // heavy core
  Rat c_heavy = Rat(0);  // 0 = auto: r^-d / 4
  // geometric factorization
  Rat c_q, c_Q, c_T, c_b;
  // restriction-geo
  long long A = 10;
  Rat B, c_Mt, c_Mb, c_qr, c_Tr;
  // restriction-nongeo
  Rat c_box = Rat(1, 8);
  int nongeo_levels = 3;
};

/// preset = "paper-constants" or "desk-scale"; fills the override block.
void apply_preset(ConstructionParams& p, const std::string& preset);

ConstructionParams params_from_json(const std::string& text);
std::string params_to_json(const ConstructionParams& p);

struct MeasureFamily {
  ScaleSequence sc;
  std::vector<DiscreteMeasure> levels;  // mu_1 .. mu_N
  OffspringAssignment assignment;
  std::vector<Int> profile;  // T_n for uniform systems
};

struct SalemBuild {
  MeasureFamily fam;
  std::vector<AdSampleInfo> info;  // sampler data per level
  Rat frost_const;                 // audited Frostman constant for the target exponent
  Rat target;                      // the exponent the audit used
};

SalemBuild build_salem(const ConstructionParams& p);
/// Same construction with an explicit target exponent (used as the base of
/// other builders, e.g. exponent beta).
SalemBuild build_salem_with(const ConstructionParams& p, const Rat& exponent);

struct HeavyCoreMeasure {
  MeasureFamily fam;
  Rat c;                   // realized core constant
  std::vector<Rat> lambda;  // dyadic upper roundings of c * sT_n * M_n^-alpha
  std::vector<Int> bT, sT;  // beta-branch and s-branch profiles
  std::vector<TreeLeafSet> cores;  // core leaf sets F_n per level
};

HeavyCoreMeasure build_heavy_core(const ConstructionParams& p);

struct GeoFactorLevel {
  Coord M = 0, Mt = 0, q = 0, Q = 0, b = 0;
  Int Tbar;
};

struct FactorizedMeasure {
  ScaleSequence sc;
  MeasureFamily grid;      // structured factor
  MeasureFamily random;    // sampled factor
  MeasureFamily combined;  // their convolution system
  std::vector<GeoFactorLevel> param;
  bool dirac_shortcut = false;  // beta == alpha case
};

FactorizedMeasure build_geometric_factorization(const ConstructionParams& p);

struct ResGeoLevel {
  Coord R = 0, Mt = 0, Mb = 0, ell = 0, qb = 0, Qb = 0, Qt = 0, M = 0;
  Int T;
  Int L;  // resonance spacing A * Mb * Mt * MM_{k-1}
  std::vector<Pt> Db;  // arithmetic pattern at this level
  std::vector<Pt> Hb;  // deterministic offspring superset, #Hb = T
};

struct RestrictionGeoBundle {
  ScaleSequence sc;
  long long A = 0;
  MeasureFamily grid;
  MeasureFamily random;
  MeasureFamily combined;
  std::vector<ResGeoLevel> param;
  std::vector<DiscreteMeasure> eta;    // eta_n per level (sub-probability)
  std::vector<DiscreteMeasure> f_sub;  // f_n d mu_N as a measure at level N
  std::vector<Rat> tau_ar;             // prod_{k<=n} Mb_k^d / T_k
};

RestrictionGeoBundle build_restriction_geometric(const ConstructionParams& p);

struct NongeoLevel {
  int n = 0;
  Coord rho = 1;
  Int z_count;
  int sigma_depth = 0;
  std::vector<Rat> t;  // translation t_n
  DiscreteMeasure nu;
  Rat weight;  // n^-2 2^-beta*n before normalization
};

struct RestrictionNongeoFamily {
  SalemBuild sigma;  // base measure with exponent beta
  std::vector<NongeoLevel> levels;
  DiscreteMeasure mu;  // normalized mixture over the built range
  Rat W;               // realized normalization constant
  Rat c_box;
  Rat frost_scale_alpha;  // r^alpha and r^beta, both carried
  Rat frost_scale_beta;
};

RestrictionNongeoFamily build_restriction_nongeometric(const ConstructionParams& p);

/// Re-indexes mu onto a finer lattice: new_den must be a multiple of mu.den.
DiscreteMeasure lift_measure(const DiscreteMeasure& mu, int new_level, const Int& new_den);

}  // namespace fractal
