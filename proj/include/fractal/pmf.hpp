#pragma once

#include <complex>
#include <vector>

#include "fractal/scales.hpp"

namespace fractal {

/// Distribution of Y_1 + ... + Y_r with Y_i uniform on {0..M_n-1}; the joint
/// d-dimensional mass is the product of per-coordinate masses.
struct Pmf {
  int n = 0;
  int d = 1;
  int r = 1;
  Coord M = 2;
  std::vector<Rat> q;  // per-coordinate table on {0..r(M-1)}

  Rat p(const Pt& u) const;
  Coord support_max() const { return Coord(r) * (M - 1); }
};

Pmf pmf(const ScaleSequence& sc, int n);
Pmf pmf_for(int d, int r, Coord M);

/// D_N(t) = (1/N) sum_{j<N} e^(-2 pi i j t).
std::complex<double> dirichlet(long long N, double t);

/// m_n(xi) = prod_l D_{M_n}(xi_l)^r.
std::complex<double> char_m(const ScaleSequence& sc, int n, const std::vector<double>& xi);

}  // namespace fractal
