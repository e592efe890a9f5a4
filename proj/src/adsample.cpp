#include "fractal/adsample.hpp"

#include <algorithm>
#include <map>

#include "fractal/errors.hpp"

namespace fractal {

namespace {

Int ceil_mul(const Rat& a, long j) {
  // ceil(a * j)
  Int num = boost::multiprecision::numerator(a) * j;
  Int den = boost::multiprecision::denominator(a);
  Int q = num / den;
  if (q * den < num) ++q;
  return q;
}

}  // namespace

AdSampleInfo ad_sample_info(int d, int r, const Rat& alpha, Coord M) {
  if (alpha <= 0 || alpha >= d) throw DegenerateAlpha();
  AdSampleInfo info;
  info.d = d;
  info.r = r;
  info.alpha = alpha;
  int n = 0;
  while ((Coord(1) << n) < M) ++n;
  if ((Coord(1) << n) != M) throw NotDyadic("M = " + std::to_string(M));
  info.n = n;
  info.M = M;

  Rat gap = Rat(d) - alpha;
  Rat rd = rat_pow(Rat(r), d);
  int n0 = 1;
  while (cmp_pow(rd, Rat(2), gap * n0) > 0) ++n0;
  info.n0 = n0;
  // 2^(gap*n0) <= 2^gap * r^d  <=>  2^(gap*(n0-1)) <= r^d.
  info.n0_exact = cmp_pow(rd, Rat(2), gap * (n0 - 1)) >= 0;
  if (n < n0) throw BelowMinimumScale("n = " + std::to_string(n) + " < n0 = " + std::to_string(n0));

  info.s.resize(n);
  info.Ns.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) {
    if (j < n - n0) {
      Int w = ceil_mul(alpha, j + 1) - ceil_mul(alpha, j);
      info.s[j] = w.convert_to<int>();
    } else {
      info.s[j] = d;
    }
    info.Ns[j + 1] = info.Ns[j] + info.s[j];
  }
  info.T = int_pow(2, static_cast<unsigned long>(info.Ns[n]));
  info.omega = int_pow(Int(M), d) / info.T;

  Rat c_t = 2 * dyadic_upper_pow(Rat(2), gap * n0) / rd;
  Rat c_up = dyadic_upper_pow(Rat(2), Rat(d + 1) + 2 * alpha + gap * n0);
  Rat c_low = dyadic_upper_pow(Rat(4 * d), alpha / 2);
  info.C0 = std::max({Rat(1), c_t, c_up, c_low});
  return info;
}

std::vector<Pt> ad_seed_sample(const AdSampleInfo& info, SplitRng& rng) {
  int n = info.n, d = info.d;
  // zeta: for each digit slot j, fixed bits on coordinates s_j..d-1.
  std::vector<std::vector<int>> zeta(n);
  for (int j = 0; j < n; ++j) {
    zeta[j].assign(d, 0);
    for (int l = info.s[j]; l < d; ++l) zeta[j][l] = static_cast<int>(rng.uniform_int(2));
  }
  std::vector<Pt> fiber;
  fiber.push_back(Pt(d, 0));
  for (int j = 0; j < n; ++j) {
    Coord bit = Coord(1) << j;
    std::vector<Pt> next;
    next.reserve(fiber.size() << info.s[j]);
    int free = info.s[j];
    for (const auto& u : fiber) {
      for (Coord mask = 0; mask < (Coord(1) << free); ++mask) {
        Pt v = u;
        for (int l = 0; l < free; ++l)
          if (mask & (Coord(1) << l)) v[l] += bit;
        for (int l = free; l < d; ++l)
          if (zeta[j][l]) v[l] += bit;
        next.push_back(std::move(v));
      }
    }
    fiber = std::move(next);
  }
  std::sort(fiber.begin(), fiber.end());
  return fiber;
}

AdRegularSample ad_regular_sample(const AdSampleInfo& info, SplitRng& rng) {
  AdRegularSample out;
  out.seed = ad_seed_sample(info, rng);
  out.shift.assign(info.d, 0);
  for (int k = 1; k < info.r; ++k)
    for (int l = 0; l < info.d; ++l)
      out.shift[l] += static_cast<Coord>(rng.uniform_int(static_cast<std::uint64_t>(info.M)));
  out.points.reserve(out.seed.size());
  for (const auto& a : out.seed) {
    Pt s(info.d);
    for (int l = 0; l < info.d; ++l) s[l] = a[l] + out.shift[l];
    out.points.push_back(std::move(s));
  }
  return out;
}

bool check_counting_bounds(const AdSampleInfo& info, const std::vector<Pt>& fiber,
                           std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (Int(fiber.size()) != info.T) return fail("fiber size != T");
  for (const auto& u : fiber)
    for (Coord c : u)
      if (c < 0 || c >= info.M) return fail("point outside [0,M)^d");
  // Exact fiber structure: each dyadic cube of side 2^m holds 0 or 2^Ns[m] points.
  for (int m = 0; m <= info.n; ++m) {
    std::map<Pt, long long> cubes;
    for (const auto& u : fiber) {
      Pt id(u.size());
      for (size_t l = 0; l < u.size(); ++l) id[l] = u[l] >> m;
      ++cubes[id];
    }
    Int want = int_pow(2, static_cast<unsigned long>(info.Ns[m]));
    for (const auto& [id, c] : cubes)
      if (Int(c) != want) return fail("cube count at side 2^" + std::to_string(m));
  }
  // Ball bounds at C0, derived from the cube structure, for all dyadic R in [1,M].
  for (int t = 0; (Coord(1) << t) <= info.M; ++t) {
    Rat R(Coord(1) << t);
    // Lower: B(x,R) contains the side-2^m dyadic cube of x when 2^m sqrt(d) <= R.
    int m_low = -1;
    for (int m = 0; m <= info.n; ++m)
      if (rat_pow(Rat(Coord(1) << m), 2) * info.d <= R * R) m_low = m;
    Rat have = m_low < 0 ? Rat(1) : Rat(int_pow(2, static_cast<unsigned long>(info.Ns[m_low])));
    if (cmp_pow(info.C0 * have, R, info.alpha) < 0)
      return fail("lower ball bound at R = 2^" + std::to_string(t));
    // Upper: B(x,R) meets at most 2^d dyadic cubes of side 2^m when 2^m >= 2R.
    int m_up = std::min<long long>(info.n, t + 1);
    Rat cap = rat_pow(Rat(2), info.d) * Rat(int_pow(2, static_cast<unsigned long>(info.Ns[m_up])));
    if (cmp_pow(cap / info.C0, R, info.alpha) > 0)
      return fail("upper ball bound at R = 2^" + std::to_string(t));
  }
  return true;
}

}  // namespace fractal
