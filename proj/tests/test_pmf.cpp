#include <doctest.h>

#include <cmath>

#include "fractal/pmf.hpp"

using namespace fractal;

TEST_CASE("pmf of the 2-fold sum on {0,1}") {
  Pmf pm = pmf_for(1, 2, 2);
  REQUIRE(pm.q.size() == 3);
  CHECK(pm.q[0] == Rat(1, 4));
  CHECK(pm.q[1] == Rat(1, 2));
  CHECK(pm.q[2] == Rat(1, 4));
  CHECK(pm.support_max() == 2);
  CHECK(pm.p({1}) == Rat(1, 2));
}

TEST_CASE("pmf is a probability in any dimension") {
  Pmf pm = pmf_for(2, 2, 3);
  Rat total(0);
  for (Coord u = 0; u <= pm.support_max(); ++u)
    for (Coord v = 0; v <= pm.support_max(); ++v) total += pm.p({u, v});
  CHECK(total == 1);
}

TEST_CASE("dirichlet kernel values") {
  CHECK(std::abs(dirichlet(2, 0.5)) < 1e-14);
  CHECK(std::abs(dirichlet(7, 0.0) - 1.0) < 1e-14);
  CHECK(std::abs(dirichlet(7, 1.0) - 1.0) < 1e-12);  // integer periodicity
  // |D_N| <= 1 on a sample
  for (int j = 0; j < 100; ++j) CHECK(std::abs(dirichlet(5, j / 100.0)) <= 1.0 + 1e-12);
}

TEST_CASE("dirichlet lower bound near the integers") {
  for (long long N = 2; N <= 16; ++N) {
    double t = 1.0 / (2.0 * N) * 0.99;
    CHECK(std::abs(dirichlet(N, t)) >= 0.5);
  }
}

TEST_CASE("char_m at zero is one") {
  ScaleSequence sc = make_scales(1, 2, {2, 3});
  CHECK(std::abs(char_m(sc, 1, {0.0}) - 1.0) < 1e-14);
}
