#include "fractal/numeric.hpp"

#include <cmath>

namespace fractal {

Rat parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rat(num, den);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rat(Int(s));
  std::string head = s.substr(0, dot);
  std::string frac = s.substr(dot + 1);
  bool neg = !head.empty() && head[0] == '-';
  if (head == "-" || head.empty()) head = "0";
  Int ipart(head);
  if (neg && ipart > 0) ipart = -ipart;
  Int fpart = frac.empty() ? Int(0) : Int(frac);
  Int scale = int_pow(10, frac.size());
  Rat mag = Rat(boost::multiprecision::abs(ipart)) + Rat(fpart, scale);
  return neg ? -mag : mag;
}

Rat rat_pow(const Rat& b, long e) {
  if (e < 0) {
    if (b == 0) throw std::domain_error("0 to negative power");
    return Rat(1) / rat_pow(b, -e);
  }
  Rat acc(1), base = b;
  unsigned long n = static_cast<unsigned long>(e);
  while (n) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

Int int_pow(const Int& b, unsigned long e) {
  Int acc(1), base = b;
  while (e) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

int cmp_pow(const Rat& x, const Rat& base, const Rat& expo) {
  if (base <= 0) throw std::domain_error("cmp_pow: base must be positive");
  if (x <= 0) return -1;
  Int p = boost::multiprecision::numerator(expo);
  Int q = boost::multiprecision::denominator(expo);
  long pl = p.convert_to<long>();
  long ql = q.convert_to<long>();
  Rat lhs = rat_pow(x, ql);
  Rat rhs = rat_pow(base, pl);
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

namespace {

Int search_hint(const Rat& base, const Rat& expo) {
  double est = std::pow(to_double(base), to_double(expo));
  if (!std::isfinite(est) || est > 1e300) throw std::overflow_error("power out of range");
  return Int(static_cast<long long>(std::min(est, 9e18))) + 16;
}

}  // namespace

Int floor_pow(const Rat& base, const Rat& expo) {
  // Largest k with k <= base^expo.
  Int lo = 0, hi = 2 * search_hint(base, expo);
  while (lo < hi) {
    Int mid = (lo + hi + 1) / 2;
    if (cmp_pow(Rat(mid), base, expo) <= 0)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

Int ceil_pow(const Rat& base, const Rat& expo) {
  Int f = floor_pow(base, expo);
  return cmp_pow(Rat(f), base, expo) == 0 ? f : f + 1;
}

Int floor_scaled_pow(const Rat& c, const Rat& base, const Rat& expo) {
  if (c <= 0) throw std::domain_error("floor_scaled_pow: c must be positive");
  double hint = to_double(c) * std::pow(to_double(base), to_double(expo));
  if (!std::isfinite(hint) || hint > 1e300) throw std::overflow_error("power out of range");
  Int lo = 0, hi = Int(static_cast<long long>(std::min(hint, 9e18))) * 2 + 16;
  while (lo < hi) {
    Int mid = (lo + hi + 1) / 2;
    if (cmp_pow(Rat(mid) / c, base, expo) <= 0)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

Int ceil_scaled_pow(const Rat& c, const Rat& base, const Rat& expo) {
  Int f = floor_scaled_pow(c, base, expo);
  return cmp_pow(Rat(f) / c, base, expo) == 0 ? f : f + 1;
}

Rat dyadic_upper_pow(const Rat& base, const Rat& expo, unsigned bits) {
  Int s = int_pow(2, bits);
  // Smallest k with k/s >= base^expo.
  Int lo = 0, hi = 2 * s * search_hint(base, expo);
  while (lo < hi) {
    Int mid = (lo + hi) / 2;
    if (cmp_pow(Rat(mid, s), base, expo) >= 0)
      hi = mid;
    else
      lo = mid + 1;
  }
  return Rat(lo, s);
}

Rat dyadic_lower_pow(const Rat& base, const Rat& expo, unsigned bits) {
  Int s = int_pow(2, bits);
  Int lo = 0, hi = 2 * s * search_hint(base, expo);
  while (lo < hi) {
    Int mid = (lo + hi + 1) / 2;
    if (cmp_pow(Rat(mid, s), base, expo) <= 0)
      lo = mid;
    else
      hi = mid - 1;
  }
  return Rat(lo, s);
}

}  // namespace fractal
