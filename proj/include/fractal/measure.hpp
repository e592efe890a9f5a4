#pragma once

#include <complex>
#include <iosfwd>
#include <map>
#include <set>
#include <vector>

#include "fractal/scales.hpp"

namespace fractal {

using LPt = std::vector<Int>;  // lattice point of a rescaled grid

/// Purely atomic measure with atoms at a/den, a in Z^d, and exact rational
/// masses. `den` is the lattice denominator (MM[level] for tree measures, but
/// arbitrary rescalings are allowed).
struct DiscreteMeasure {
  int d = 1;
  int level = 0;
  Int den = 1;
  std::map<LPt, Rat> atoms;
  Rat total = 0;

  bool is_probability() const { return total == 1; }
  void add(const LPt& a, const Rat& mass);

  // Flat double-precision views used by the Fourier sums.
  mutable std::vector<double> flat_coords;  // atom coords a/den, row-major
  mutable std::vector<double> flat_mass;
  void ensure_cache() const;
};

DiscreteMeasure dirac_zero(int d, int level, const Int& den);

/// `order` is the digit order of the generating system (defaults to sc.r; the
/// combined factorization systems use r + 1).
DiscreteMeasure measure_from_leaves(const ScaleSequence& sc, const TreeLeafSet& leaves,
                                    int order = 0);

DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

std::complex<double> fourier_eval(const DiscreteMeasure& mu, const std::vector<double>& xi);

/// r-fold self-convolution of the unit cube indicator.
struct KernelPhi {
  int r = 1;
  int d = 1;
};

std::complex<double> phi_hat(const KernelPhi& k, const std::vector<double>& xi);
/// Phi_n: phi_hat at xi / MM[n].
std::complex<double> phi_hat_scaled(const KernelPhi& k, const ScaleSequence& sc, int n,
                                    const std::vector<double>& xi);

/// Exact mass of the open Euclidean ball B(x, rho).
Rat ball_mass(const DiscreteMeasure& mu, const std::vector<Rat>& x, const Rat& rho);
/// Same with the squared radius given; keeps radii like r sqrt(d)/M exact.
Rat ball_mass_sq(const DiscreteMeasure& mu, const std::vector<Rat>& x, const Rat& rho2);

/// Scale-n Fourier increment mu_n^(xi) - m_n(xi/MM[n]) mu_{n-1}^(xi).
std::complex<double> increment_D(const DiscreteMeasure& mu_n, const DiscreteMeasure& mu_prev,
                                 const ScaleSequence& sc, int n, const std::vector<double>& xi);

/// Exact volume of the union of sup-norm cubes a/den + [-m/den, m/den]^d.
Rat neighborhood_volume(const std::vector<LPt>& E, int d, const Int& den, const Int& m);

std::vector<LPt> difference_set(const std::vector<LPt>& E);

struct GridSpec {
  std::vector<double> lo;
  double h = 1.0;
  std::vector<long long> npts;  // per-coordinate point counts
  size_t size() const;
  std::vector<double> point(size_t flat) const;
};

/// (sum |v|^p h^d)^(1/p); p = infinity gives max |v|.
double grid_lp_norm(const GridSpec& grid, const std::vector<double>& values, double p);

/// (mu * 1_A)(x) on the grid, where A is a set of lattice cells at resolution
/// 1/den: 1_A(y) = 1 iff floor(y * den) in A coordinatewise.
std::vector<double> measure_conv_indicator(const DiscreteMeasure& mu, const std::set<LPt>& A,
                                           const GridSpec& grid);

/// Exact integral of |mu^|^2 over one period [0, den)^d: den^d * sum mass^2.
Rat l2_period_integral(const DiscreteMeasure& mu);
/// Exact integral of |mu^|^4 over one period, via the autocorrelation.
Rat l4_period_integral(const DiscreteMeasure& mu);

void write_measure(std::ostream& os, const DiscreteMeasure& mu);
DiscreteMeasure read_measure(std::istream& is);

}  // namespace fractal
