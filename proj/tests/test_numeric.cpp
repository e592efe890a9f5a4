#include <doctest.h>

#include "fractal/numeric.hpp"

using namespace fractal;

TEST_CASE("parse_rational accepts decimals, fractions, integers") {
  CHECK(parse_rational("0.3") == Rat(3, 10));
  CHECK(parse_rational("-2") == Rat(-2));
  CHECK(parse_rational("7/25") == Rat(7, 25));
  CHECK(parse_rational("1.50") == Rat(3, 2));
  CHECK_THROWS(parse_rational("abc"));
}

TEST_CASE("cmp_pow is an exact three-way comparison") {
  // 3 vs 2^(3/2): 9 < 8^... 3^2 = 9 > 2^3 = 8, so 3 > 2^(3/2)
  CHECK(cmp_pow(Rat(3), Rat(2), Rat(3, 2)) == 1);
  CHECK(cmp_pow(Rat(2), Rat(4), Rat(1, 2)) == 0);
  CHECK(cmp_pow(Rat(1414, 1000), Rat(2), Rat(1, 2)) == -1);
  CHECK(cmp_pow(Rat(1415, 1000), Rat(2), Rat(1, 2)) == 1);
  // negative exponent
  CHECK(cmp_pow(Rat(1, 2), Rat(4), Rat(-1, 2)) == 0);
  CHECK(cmp_pow(Rat(1, 3), Rat(4), Rat(-1, 2)) == -1);
}

TEST_CASE("floor_pow and ceil_pow") {
  CHECK(floor_pow(Rat(2), Rat(3, 2)) == 2);
  CHECK(ceil_pow(Rat(2), Rat(3, 2)) == 3);
  CHECK(floor_pow(Rat(4), Rat(1, 2)) == 2);
  CHECK(ceil_pow(Rat(4), Rat(1, 2)) == 2);
  CHECK(floor_pow(Rat(10), Rat(2)) == 100);
}

TEST_CASE("scaled floor/ceil of c * base^expo") {
  // 3/2 * 4^(1/2) = 3 exactly
  CHECK(floor_scaled_pow(Rat(3, 2), Rat(4), Rat(1, 2)) == 3);
  CHECK(ceil_scaled_pow(Rat(3, 2), Rat(4), Rat(1, 2)) == 3);
  // 2 * 2^(1/2) = 2.828...
  CHECK(floor_scaled_pow(Rat(2), Rat(2), Rat(1, 2)) == 2);
  CHECK(ceil_scaled_pow(Rat(2), Rat(2), Rat(1, 2)) == 3);
  // 1/2 * 37^(1/5) = 1.028...
  CHECK(floor_scaled_pow(Rat(1, 2), Rat(37), Rat(1, 5)) == 1);
  CHECK(ceil_scaled_pow(Rat(1, 2), Rat(37), Rat(1, 5)) == 2);
}

TEST_CASE("dyadic bounds sandwich the true power") {
  Rat lo = dyadic_lower_pow(Rat(2), Rat(1, 2));
  Rat hi = dyadic_upper_pow(Rat(2), Rat(1, 2));
  CHECK(lo <= hi);
  CHECK(cmp_pow(lo, Rat(2), Rat(1, 2)) <= 0);
  CHECK(cmp_pow(hi, Rat(2), Rat(1, 2)) >= 0);
  CHECK(hi - lo <= Rat(1, Int(1) << 60));
  // exact powers collapse
  CHECK(dyadic_lower_pow(Rat(4), Rat(1, 2)) == 2);
  CHECK(dyadic_upper_pow(Rat(4), Rat(1, 2)) == 2);
}

TEST_CASE("rat_pow and int_pow") {
  CHECK(rat_pow(Rat(2, 3), 3) == Rat(8, 27));
  CHECK(rat_pow(Rat(2), -2) == Rat(1, 4));
  CHECK(int_pow(Int(3), 4) == 81);
}
