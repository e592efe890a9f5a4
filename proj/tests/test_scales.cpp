#include <doctest.h>

#include "fractal/errors.hpp"
#include "fractal/scales.hpp"

using namespace fractal;

TEST_CASE("make_scales computes exact prefix products") {
  ScaleSequence sc = make_scales(1, 2, {2, 3});
  REQUIRE(sc.MM.size() == 3);
  CHECK(sc.MM[0] == 1);
  CHECK(sc.MM[1] == 2);
  CHECK(sc.MM[2] == 6);
}

TEST_CASE("make_scales rejects bad schedules") {
  CHECK_THROWS_AS(make_scales(1, 2, {3, 3}), NonIncreasingScales);
  CHECK_THROWS_AS(make_scales(1, 2, {3, 2}), NonIncreasingScales);
  CHECK_THROWS_AS(make_scales(1, 2, {1, 2}), ScaleTooSmall);
}

TEST_CASE("default dyadic schedule") {
  std::vector<Coord> M = default_dyadic_schedule(2, 3);
  REQUIRE(M.size() == 3);
  CHECK(M[0] == 8);
  CHECK(M[1] == 16);
  CHECK(M[2] == 32);
}

TEST_CASE("coding_point sums digits over prefix scales") {
  ScaleSequence sc = make_scales(1, 2, {2, 3});
  Word w = {{1}, {4}};  // order-2 digits: {0..2} then {0..4}
  CodingPoint cp = coding_point(sc, w, 2);
  CHECK(cp.x[0] == Rat(1, 2) + Rat(4, 6));
  CHECK(cp.lattice[0] == 7);  // 6 * (1/2 + 4/6)
  Word bad = {{5}};
  CHECK_THROWS_AS(coding_point(sc, bad, 2), DigitOutOfRange);
}

TEST_CASE("expand_tree multiplies cylinder masses and checks depth") {
  ScaleSequence sc = make_scales(1, 2, {2, 3});
  OffspringAssignment a;
  a.order = 2;
  a.depth = 2;
  a.set_uniform({}, {{0}, {2}});
  a.set_uniform({{0}}, {{0}, {1}});
  a.set_uniform({{2}}, {{3}});
  TreeLeafSet leaves = expand_tree(sc, a, 2);
  REQUIRE(leaves.leaves.size() == 3);
  Rat total(0);
  for (const auto& [w, m] : leaves.leaves) total += m;
  CHECK(total == 1);
  CHECK_THROWS_AS(expand_tree(sc, a, 3), DepthExceedsScales);
}

TEST_CASE("lattice multiplicity bounded by r^(dn)") {
  ScaleSequence sc = make_scales(1, 2, {2, 3});
  OffspringAssignment a;
  a.order = 2;
  a.depth = 1;
  // digits 2/2 and (coding collision needs equal prefix sums): single level,
  // distinct digits give multiplicity 1
  a.set_uniform({}, {{0}, {1}, {2}});
  TreeLeafSet leaves = expand_tree(sc, a, 1);
  CHECK(max_lattice_multiplicity(sc, leaves) == 1);
  CHECK(max_lattice_multiplicity(sc, leaves) <= int_pow(Int(2), 1));
}
