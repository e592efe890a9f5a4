#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fractal {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& x) { return static_cast<double>(x); }
inline double to_double(const Int& x) { return static_cast<double>(x); }

/// Parses a decimal string ("0.3", "-2", "7/25") into an exact rational.
Rat parse_rational(const std::string& s);

/// b^e for integer e (e >= 0 or b != 0).
Rat rat_pow(const Rat& b, long e);
Int int_pow(const Int& b, unsigned long e);

/// Exact three-way comparison of x against base^(p/q) for positive base and
/// rational exponent p/q. Returns -1, 0, +1.
int cmp_pow(const Rat& x, const Rat& base, const Rat& expo);

/// Exact floor/ceil of base^expo (base > 0, result fits desk-scale integers).
Int floor_pow(const Rat& base, const Rat& expo);
Int ceil_pow(const Rat& base, const Rat& expo);

/// Exact floor/ceil of c * base^expo for a positive rational multiplier c.
Int floor_scaled_pow(const Rat& c, const Rat& base, const Rat& expo);
Int ceil_scaled_pow(const Rat& c, const Rat& base, const Rat& expo);

/// Smallest dyadic rational k/2^bits that is >= base^expo (resp. <= for lower).
Rat dyadic_upper_pow(const Rat& base, const Rat& expo, unsigned bits = 64);
Rat dyadic_lower_pow(const Rat& base, const Rat& expo, unsigned bits = 64);

}  // namespace fractal
