#pragma once

#include <string>
#include <vector>

#include "fractal/numeric.hpp"
#include "fractal/rng.hpp"
#include "fractal/scales.hpp"

namespace fractal {

/// Derived data for the dyadic fiber sampler at one scale M = 2^n.
struct AdSampleInfo {
  int d = 1;
  int r = 1;
  Rat alpha;
  int n0 = 1;
  bool n0_exact = true;  // whether r^d <= 2^((d-a)n0) <= 2^(d-a) r^d held
  int n = 0;
  Coord M = 0;
  std::vector<int> s;          // digit widths s_0..s_{n-1} (low-order digit first)
  std::vector<long long> Ns;   // Ns[m] = s_0 + ... + s_{m-1}
  Int T;                       // fiber size 2^Ns[n]
  Int omega;                   // number of fibers M^d / T
  Rat C0;                      // reported regularity constant
};

/// Computes n0, the digit widths, T, and C0 for (d, r, alpha, M = 2^n).
AdSampleInfo ad_sample_info(int d, int r, const Rat& alpha, Coord M);

/// One fiber A_zeta, drawn uniformly over fibers; #A = T.
std::vector<Pt> ad_seed_sample(const AdSampleInfo& info, SplitRng& rng);

struct AdRegularSample {
  std::vector<Pt> points;  // S = A + v, subset of {0..r(M-1)}^d
  std::vector<Pt> seed;    // the fiber A
  Pt shift;                // v = Y_2 + ... + Y_r
};

AdRegularSample ad_regular_sample(const AdSampleInfo& info, SplitRng& rng);

/// Verifies the exact per-realization counting structure of a fiber: every
/// dyadic cube of side 2^m holds 0 or 2^Ns[m] points, and the derived ball
/// bounds at C0 hold for every center in the set and every dyadic R in [1, M].
/// Returns true on success; otherwise fills `why`.
bool check_counting_bounds(const AdSampleInfo& info, const std::vector<Pt>& fiber,
                           std::string* why);

}  // namespace fractal
