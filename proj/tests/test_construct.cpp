#include <doctest.h>

#include <sstream>

#include "fractal/construct.hpp"
#include "fractal/errors.hpp"
#include "fractal/measure.hpp"

using namespace fractal;

namespace {

ConstructionParams desk(const std::string& name) {
  ConstructionParams p;
  p.name = name;
  p.d = 1;
  p.r = 2;
  p.seed = 11;
  apply_preset(p, "desk-scale");
  return p;
}

std::string dump_family(const MeasureFamily& fam) {
  std::ostringstream os;
  for (const auto& mu : fam.levels) write_measure(os, mu);
  return os.str();
}

}  // namespace

TEST_CASE("params JSON round-trip") {
  ConstructionParams p = desk("salem");
  p.alpha = Rat(7, 10);
  p.depth = 3;
  std::string j = params_to_json(p);
  ConstructionParams q = params_from_json(j);
  CHECK(params_to_json(q) == j);
  CHECK(q.alpha == p.alpha);
  CHECK(q.seed == p.seed);
}

TEST_CASE("parameter document errors") {
  CHECK_THROWS_AS(params_from_json("not json"), ParseError);
  CHECK_THROWS_AS(params_from_json(R"({"preset":"bogus"})"), ValidationError);
}

TEST_CASE("salem build is deterministic in the seed") {
  ConstructionParams p = desk("salem");
  p.alpha = Rat(1, 2);
  p.depth = 3;
  SalemBuild a = build_salem(p);
  SalemBuild b = build_salem(p);
  CHECK(dump_family(a.fam) == dump_family(b.fam));
  p.seed = 12;
  SalemBuild c = build_salem(p);
  CHECK(dump_family(a.fam) != dump_family(c.fam));
  CHECK(a.fam.levels.size() == 3);
  for (const auto& mu : a.fam.levels) CHECK(mu.total == 1);
  CHECK(a.frost_const > 0);
}

TEST_CASE("heavy core preconditions") {
  ConstructionParams p = desk("heavy-core");
  p.alpha = Rat(2, 5);
  p.beta = Rat(3, 5);
  p.depth = 2;
  p.s_exp = Rat(1, 2);  // > 2 alpha - beta = 1/5
  CHECK_THROWS_AS(build_heavy_core(p), InvalidS);
  p.s_exp = Rat(0);
  p.alpha = Rat(4, 5);  // alpha >= beta
  CHECK_THROWS_AS(build_heavy_core(p), PreconditionViolated);
}

TEST_CASE("heavy core: s=0 realization and core masses") {
  ConstructionParams p = desk("heavy-core");
  p.alpha = Rat(2, 5);
  p.beta = Rat(3, 5);
  p.s_exp = Rat(0);
  p.depth = 2;
  HeavyCoreMeasure hc = build_heavy_core(p);
  CHECK(hc.fam.levels.size() == 2);
  for (const auto& mu : hc.fam.levels) CHECK(mu.total == 1);
  REQUIRE(hc.cores.size() == 2);
  // s = 0: a single core leaf per level
  CHECK(hc.cores[0].leaves.size() == 1);
  CHECK(hc.cores[1].leaves.size() == 1);
  for (const auto& sT : hc.sT) CHECK(sT == 1);
  CHECK(hc.c > 0);
}

TEST_CASE("geometric factorization: exact convolution identity") {
  ConstructionParams p = desk("geo-factorization");
  p.alpha = Rat(7, 10);
  p.beta = Rat(2, 5);
  p.M0 = 33;
  p.depth = 2;
  FactorizedMeasure fm = build_geometric_factorization(p);
  for (int n = 1; n <= 2; ++n) {
    DiscreteMeasure conv = convolve(fm.grid.levels[n - 1], fm.random.levels[n - 1]);
    CHECK(conv.atoms == fm.combined.levels[n - 1].atoms);
  }
  // derived integers at M_1 = 34
  CHECK(fm.param[0].Mt == 3);
  CHECK(fm.param[0].q == 2);
  CHECK(fm.param[0].Q == 8);
  CHECK(fm.param[0].b == 4);
  CHECK(fm.param[0].Tbar == 3);
}

TEST_CASE("geometric factorization collapses to diracs when beta = alpha") {
  ConstructionParams p = desk("geo-factorization");
  p.alpha = Rat(1, 2);
  p.beta = Rat(1, 2);
  p.M0 = 33;
  p.depth = 2;
  FactorizedMeasure fm = build_geometric_factorization(p);
  CHECK(fm.dirac_shortcut);
  for (const auto& mu : fm.grid.levels) {
    CHECK(mu.atoms.size() == 1);
    CHECK(mu.atoms.begin()->first == LPt(1, Int(0)));
  }
  CHECK_THROWS_AS([&] {
    ConstructionParams bad = p;
    bad.beta = Rat(3, 5);  // beta > alpha
    build_geometric_factorization(bad);
  }(), PreconditionViolated);
}

TEST_CASE("restriction-geo desk instance derived parameters") {
  ConstructionParams p = desk("restriction-geo");
  p.alpha = Rat(7, 10);
  p.beta = Rat(2, 5);
  p.R0 = 37;
  p.depth = 2;
  RestrictionGeoBundle b = build_restriction_geometric(p);
  REQUIRE(b.param.size() == 2);
  CHECK(b.param[0].M == 216);
  CHECK(b.param[1].M == 432);
  CHECK(b.param[0].T == 5);
  CHECK(b.param[1].T == 6);
  CHECK(b.param[0].Qb == 18);
  CHECK(b.param[1].Qb == 27);
  CHECK(b.param[0].L == 12);
  // eta_n totals prod Mb_k^d / T_k
  CHECK(b.eta[0].total == b.tau_ar[0]);
  CHECK(b.eta[1].total == b.tau_ar[1]);
  // deterministic arithmetic pattern: Db = {0, Qb}
  CHECK(b.param[0].Db == std::vector<Pt>{{0}, {18}});
  CHECK(b.param[1].Db == std::vector<Pt>{{0}, {27}});
}

TEST_CASE("restriction-nongeo builds a normalized mixture") {
  ConstructionParams p = desk("restriction-nongeo");
  p.alpha = Rat(1, 2);
  p.beta = Rat(4, 5);
  p.nongeo_levels = 2;
  RestrictionNongeoFamily fam = build_restriction_nongeometric(p);
  REQUIRE(fam.levels.size() == 2);
  CHECK(fam.mu.total == 1);
  CHECK(fam.W > 0);
  for (const auto& lv : fam.levels) CHECK(lv.nu.total == 1);
  CHECK(fam.levels[0].rho == 2);
}

TEST_CASE("lift_measure refines the lattice exactly") {
  DiscreteMeasure mu;
  mu.d = 1;
  mu.level = 1;
  mu.den = 2;
  mu.add({Int(1)}, Rat(1));
  DiscreteMeasure up = lift_measure(mu, 2, 6);
  CHECK(up.atoms.count({Int(3)}) == 1);
  CHECK_THROWS_AS(lift_measure(mu, 2, 5), ModulusNotDivisible);
}
