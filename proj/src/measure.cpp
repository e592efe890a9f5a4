#include "fractal/measure.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fractal/errors.hpp"
#include "fractal/pmf.hpp"

namespace fractal {

void DiscreteMeasure::add(const LPt& a, const Rat& mass) {
  if (mass <= 0) return;
  atoms[a] += mass;
  total += mass;
  flat_coords.clear();
  flat_mass.clear();
}

void DiscreteMeasure::ensure_cache() const {
  if (!flat_mass.empty() || atoms.empty()) return;
  double inv = 1.0 / to_double(den);
  flat_coords.reserve(atoms.size() * d);
  flat_mass.reserve(atoms.size());
  for (const auto& [a, m] : atoms) {
    for (const auto& c : a) flat_coords.push_back(to_double(Rat(c)) * inv);
    flat_mass.push_back(to_double(m));
  }
}

DiscreteMeasure dirac_zero(int d, int level, const Int& den) {
  DiscreteMeasure mu;
  mu.d = d;
  mu.level = level;
  mu.den = den;
  mu.add(LPt(d, 0), Rat(1));
  return mu;
}

DiscreteMeasure measure_from_leaves(const ScaleSequence& sc, const TreeLeafSet& leaves,
                                    int order) {
  if (order == 0) order = sc.r;
  DiscreteMeasure mu;
  mu.d = sc.d;
  mu.level = leaves.depth;
  mu.den = sc.MM[leaves.depth];
  for (const auto& [w, mass] : leaves.leaves) {
    if (static_cast<int>(w.size()) != leaves.depth) throw MixedDepths();
    mu.add(coding_point(sc, w, order).lattice, mass);
  }
  return mu;
}

DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.level != nu.level || mu.den != nu.den || mu.d != nu.d) throw LevelMismatch();
  DiscreteMeasure out;
  out.d = mu.d;
  out.level = mu.level;
  out.den = mu.den;
  for (const auto& [a, ma] : mu.atoms)
    for (const auto& [b, mb] : nu.atoms) {
      LPt s(a.size());
      for (size_t l = 0; l < a.size(); ++l) s[l] = a[l] + b[l];
      out.add(s, ma * mb);
    }
  return out;
}

std::complex<double> fourier_eval(const DiscreteMeasure& mu, const std::vector<double>& xi) {
  mu.ensure_cache();
  double re = 0, im = 0;
  const double* c = mu.flat_coords.data();
  for (size_t i = 0; i < mu.flat_mass.size(); ++i, c += mu.d) {
    double phase = 0;
    for (int l = 0; l < mu.d; ++l) phase += c[l] * xi[l];
    phase *= -2.0 * M_PI;
    re += mu.flat_mass[i] * std::cos(phase);
    im += mu.flat_mass[i] * std::sin(phase);
  }
  return {re, im};
}

std::complex<double> phi_hat(const KernelPhi& k, const std::vector<double>& xi) {
  std::complex<double> out(1.0, 0.0);
  for (int l = 0; l < k.d; ++l) {
    double t = xi[l];
    std::complex<double> f;
    if (std::abs(t) < 1e-14) {
      f = 1.0;
    } else {
      // (1 - e^{-2 pi i t}) / (2 pi i t) = e^{-pi i t} sin(pi t)/(pi t)
      double s = std::sin(M_PI * t) / (M_PI * t);
      f = std::polar(s, -M_PI * t);
    }
    out *= f;
  }
  return std::pow(out, k.r);
}

std::complex<double> phi_hat_scaled(const KernelPhi& k, const ScaleSequence& sc, int n,
                                    const std::vector<double>& xi) {
  double inv = 1.0 / to_double(Rat(sc.MM[n]));
  std::vector<double> y(xi.size());
  for (size_t l = 0; l < xi.size(); ++l) y[l] = xi[l] * inv;
  return phi_hat(k, y);
}

Rat ball_mass_sq(const DiscreteMeasure& mu, const std::vector<Rat>& x, const Rat& rho2) {
  Rat out(0);
  for (const auto& [a, m] : mu.atoms) {
    Rat s(0);
    for (size_t l = 0; l < a.size(); ++l) {
      Rat dlt = Rat(a[l]) / Rat(mu.den) - x[l];
      s += dlt * dlt;
    }
    if (s < rho2) out += m;
  }
  return out;
}

Rat ball_mass(const DiscreteMeasure& mu, const std::vector<Rat>& x, const Rat& rho) {
  if (rho <= 0) throw ValidationError("rho must be positive");
  return ball_mass_sq(mu, x, rho * rho);
}

std::complex<double> increment_D(const DiscreteMeasure& mu_n, const DiscreteMeasure& mu_prev,
                                 const ScaleSequence& sc, int n, const std::vector<double>& xi) {
  if (mu_n.level != n || mu_prev.level != n - 1) throw LevelMismatch();
  double inv = 1.0 / to_double(Rat(sc.MM[n]));
  std::vector<double> y(xi.size());
  for (size_t l = 0; l < xi.size(); ++l) y[l] = xi[l] * inv;
  return fourier_eval(mu_n, xi) - char_m(sc, n, y) * fourier_eval(mu_prev, xi);
}

Rat neighborhood_volume(const std::vector<LPt>& E, int d, const Int& den, const Int& m) {
  if (m < 1) throw NonLatticeDelta("m must be a positive integer");
  // The cube a/den + [-m/den, m/den]^d covers lattice cells [c/den,(c+1)/den)
  // for c in {a-m .. a+m-1} per coordinate.
  std::set<LPt> cells;
  Int side = 2 * m;
  LPt off(d);
  for (const auto& a : E) {
    std::fill(off.begin(), off.end(), Int(0));
    while (true) {
      LPt c(d);
      for (int l = 0; l < d; ++l) c[l] = a[l] - m + off[l];
      cells.insert(std::move(c));
      int l = 0;
      for (; l < d; ++l) {
        if (++off[l] < side) break;
        off[l] = 0;
      }
      if (l == d) break;
    }
  }
  Rat cell_vol = 1 / Rat(den);
  return Rat(Int(cells.size())) * rat_pow(cell_vol, d);
}

std::vector<LPt> difference_set(const std::vector<LPt>& E) {
  std::set<LPt> out;
  for (const auto& a : E)
    for (const auto& b : E) {
      LPt s(a.size());
      for (size_t l = 0; l < a.size(); ++l) s[l] = a[l] - b[l];
      out.insert(std::move(s));
    }
  return {out.begin(), out.end()};
}

size_t GridSpec::size() const {
  size_t n = 1;
  for (long long k : npts) n *= static_cast<size_t>(k);
  return n;
}

std::vector<double> GridSpec::point(size_t flat) const {
  std::vector<double> x(lo.size());
  for (size_t l = 0; l < lo.size(); ++l) {
    x[l] = lo[l] + h * static_cast<double>(flat % npts[l]);
    flat /= npts[l];
  }
  return x;
}

double grid_lp_norm(const GridSpec& grid, const std::vector<double>& values, double p) {
  if (values.empty() || grid.size() != values.size()) throw EmptyGrid();
  if (std::isinf(p)) {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  if (p < 1) throw ValidationError("p must be >= 1");
  double s = 0;
  for (double v : values) s += std::pow(std::abs(v), p);
  double hd = std::pow(grid.h, static_cast<double>(grid.lo.size()));
  return std::pow(s * hd, 1.0 / p);
}

std::vector<double> measure_conv_indicator(const DiscreteMeasure& mu, const std::set<LPt>& A,
                                           const GridSpec& grid) {
  double den = to_double(Rat(mu.den));
  std::vector<double> out(grid.size(), 0.0);
  std::vector<std::vector<double>> coords;
  std::vector<double> masses;
  for (const auto& [a, m] : mu.atoms) {
    std::vector<double> c(a.size());
    for (size_t l = 0; l < a.size(); ++l) c[l] = to_double(Rat(a[l])) / den;
    coords.push_back(std::move(c));
    masses.push_back(to_double(m));
  }
  LPt cell(mu.d);
  for (size_t i = 0; i < out.size(); ++i) {
    std::vector<double> x = grid.point(i);
    double v = 0;
    for (size_t j = 0; j < coords.size(); ++j) {
      for (int l = 0; l < mu.d; ++l) cell[l] = Int(std::floor((x[l] - coords[j][l]) * den));
      if (A.count(cell)) v += masses[j];
    }
    out[i] = v;
  }
  return out;
}

Rat l2_period_integral(const DiscreteMeasure& mu) {
  Rat s(0);
  for (const auto& [a, m] : mu.atoms) s += m * m;
  return rat_pow(Rat(mu.den), mu.d) * s;
}

Rat l4_period_integral(const DiscreteMeasure& mu) {
  std::map<LPt, Rat> auto_corr;
  for (const auto& [a, ma] : mu.atoms)
    for (const auto& [b, mb] : mu.atoms) {
      LPt u(a.size());
      for (size_t l = 0; l < a.size(); ++l) u[l] = a[l] - b[l];
      auto_corr[u] += ma * mb;
    }
  Rat s(0);
  for (const auto& [u, c] : auto_corr) s += c * c;
  return rat_pow(Rat(mu.den), mu.d) * s;
}

void write_measure(std::ostream& os, const DiscreteMeasure& mu) {
  os << mu.d << ' ' << mu.level << ' ' << mu.den << '\n';
  for (const auto& [a, m] : mu.atoms) {
    for (const auto& c : a) os << c << ' ';
    os << boost::multiprecision::numerator(m) << ' ' << boost::multiprecision::denominator(m)
       << '\n';
  }
}

DiscreteMeasure read_measure(std::istream& is) {
  DiscreteMeasure mu;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty measure stream");
  {
    std::istringstream h(line);
    if (!(h >> mu.d >> mu.level >> mu.den)) throw ParseError("bad measure header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    LPt a(mu.d);
    for (int l = 0; l < mu.d; ++l)
      if (!(ls >> a[l])) throw ParseError("bad atom line");
    Int num, den;
    if (!(ls >> num >> den) || den <= 0) throw ParseError("bad atom mass");
    mu.add(a, Rat(num, den));
  }
  return mu;
}

}  // namespace fractal
