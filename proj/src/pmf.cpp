#include "fractal/pmf.hpp"

#include <cmath>

#include "fractal/errors.hpp"

namespace fractal {

Rat Pmf::p(const Pt& u) const {
  Rat out(1);
  for (Coord c : u) {
    if (c < 0 || c > support_max()) return Rat(0);
    out *= q[static_cast<size_t>(c)];
  }
  return out;
}

Pmf pmf_for(int d, int r, Coord M) {
  Pmf out;
  out.d = d;
  out.r = r;
  out.M = M;
  std::vector<Rat> acc{Rat(1)};
  std::vector<Rat> uni(static_cast<size_t>(M), Rat(1, M));
  for (int k = 0; k < r; ++k) {
    std::vector<Rat> next(acc.size() + uni.size() - 1, Rat(0));
    for (size_t i = 0; i < acc.size(); ++i)
      for (size_t j = 0; j < uni.size(); ++j) next[i + j] += acc[i] * uni[j];
    acc = std::move(next);
  }
  out.q = std::move(acc);
  return out;
}

Pmf pmf(const ScaleSequence& sc, int n) {
  if (n < 1 || n > sc.depth()) throw ValidationError("pmf level out of range");
  Pmf out = pmf_for(sc.d, sc.r, sc.M[n - 1]);
  out.n = n;
  return out;
}

std::complex<double> dirichlet(long long N, double t) {
  double s = std::sin(M_PI * t);
  if (std::abs(s) < 1e-12) {
    std::complex<double> acc(0.0, 0.0);
    for (long long j = 0; j < N; ++j)
      acc += std::polar(1.0, -2.0 * M_PI * static_cast<double>(j) * t);
    return acc / static_cast<double>(N);
  }
  double ratio = std::sin(M_PI * static_cast<double>(N) * t) / (static_cast<double>(N) * s);
  return ratio * std::polar(1.0, -M_PI * static_cast<double>(N - 1) * t);
}

std::complex<double> char_m(const ScaleSequence& sc, int n, const std::vector<double>& xi) {
  if (static_cast<int>(xi.size()) != sc.d) throw ValidationError("char_m: wrong xi dimension");
  std::complex<double> out(1.0, 0.0);
  for (double x : xi) {
    std::complex<double> dk = dirichlet(sc.M[n - 1], x);
    std::complex<double> pw(1.0, 0.0);
    for (int k = 0; k < sc.r; ++k) pw *= dk;
    out *= pw;
  }
  return out;
}

}  // namespace fractal
