#include <doctest.h>

#include "fractal/adsample.hpp"
#include "fractal/errors.hpp"

using namespace fractal;

TEST_CASE("ad_sample_info seed scale for d=1, r=2, alpha=1/2") {
  AdSampleInfo info = ad_sample_info(1, 2, Rat(1, 2), 16);
  CHECK(info.n0 == 2);  // smallest n0 with 2^((1-1/2) n0) >= 2
  CHECK(info.M == 16);
  CHECK(info.T == int_pow(Int(2), static_cast<unsigned long>(info.Ns.back())));
  CHECK(info.omega * info.T == int_pow(Int(16), 1));
}

TEST_CASE("ad_sample_info rejects bad inputs") {
  CHECK_THROWS_AS(ad_sample_info(1, 2, Rat(1, 2), 12), NotDyadic);
  CHECK_THROWS_AS(ad_sample_info(1, 2, Rat(1, 2), 2), BelowMinimumScale);
  CHECK_THROWS_AS(ad_sample_info(1, 2, Rat(3, 2), 16), DegenerateAlpha);
}

TEST_CASE("fiber size obeys the T bounds at the reported C0") {
  for (Coord M : {16, 32, 64}) {
    AdSampleInfo info = ad_sample_info(1, 2, Rat(1, 2), M);
    // r^d M^alpha <= T <= C0 r^d M^alpha, exactly
    CHECK(cmp_pow(Rat(info.T) / 2, Rat(M), Rat(1, 2)) >= 0);
    CHECK(cmp_pow(Rat(info.T) / (2 * info.C0), Rat(M), Rat(1, 2)) <= 0);
  }
}

TEST_CASE("samples are reproducible and structurally valid") {
  AdSampleInfo info = ad_sample_info(1, 2, Rat(1, 2), 16);
  SplitRng r1(7), r2(7);
  AdRegularSample s1 = ad_regular_sample(info, r1);
  AdRegularSample s2 = ad_regular_sample(info, r2);
  CHECK(s1.points == s2.points);
  CHECK(Int(s1.points.size()) == info.T);
  for (const auto& p : s1.points) {
    CHECK(p[0] >= 0);
    CHECK(p[0] <= 2 * (16 - 1));
  }
  std::string why;
  CHECK(check_counting_bounds(info, s1.seed, &why));
}

TEST_CASE("counting bounds reject a tampered fiber") {
  AdSampleInfo info = ad_sample_info(1, 2, Rat(1, 2), 16);
  SplitRng rng(9);
  AdRegularSample s = ad_regular_sample(info, rng);
  std::vector<Pt> bad = s.seed;
  bad.pop_back();
  std::string why;
  CHECK(!check_counting_bounds(info, bad, &why));
  CHECK(!why.empty());
}
