#include <doctest.h>

#include <sstream>

#include "fractal/analysis.hpp"
#include "fractal/construct.hpp"
#include "fractal/errors.hpp"
#include "fractal/rng.hpp"

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

RestrictionGeoBundle desk_bundle() {
  ConstructionParams p = desk("restriction-geo");
  p.alpha = Rat(7, 10);
  p.beta = Rat(2, 5);
  p.R0 = 37;
  p.depth = 2;
  return build_restriction_geometric(p);
}

}  // namespace

TEST_CASE("region vertices of the triangle") {
  ExponentRegion reg{Rat(7, 10), Rat(2, 5), 1};
  auto verts = region_vertices(reg, RegionKind::Delta);
  REQUIRE(verts.size() == 3);
  auto C = critical_vertex(reg);
  // p = (2(d-a)+b)/((d-a)+b) with d-a = 3/10, b = 2/5
  CHECK(C.first == Rat(7, 10));
  CHECK(C.second == Rat(3, 10));
  bool found = false;
  for (const auto& v : verts)
    if (v == C) found = true;
  CHECK(found);
  CHECK(hull_membership(verts, Rat(1, 2), Rat(1, 3)));
  CHECK(!hull_membership(verts, Rat(4, 5), Rat(1, 5)));
}

TEST_CASE("critical vertex at alpha = beta = d-1") {
  for (int d : {2, 3, 5}) {
    ExponentRegion reg{Rat(d - 1), Rat(d - 1), d};
    auto C = critical_vertex(reg);
    CHECK(C.first == Rat(d, d + 1));
    CHECK(C.second == Rat(1, d + 1));
  }
}

TEST_CASE("trapezoid vertices") {
  ExponentRegion reg{Rat(1, 2), Rat(1, 2), 1};
  auto verts = region_vertices(reg, RegionKind::Trap);
  REQUIRE(verts.size() == 4);
  // D_beta = ((d+b)/(2d), 1/2) and its reflection
  bool d1 = false, d2 = false;
  for (const auto& v : verts) {
    if (v == std::make_pair(Rat(3, 4), Rat(1, 2))) d1 = true;
    if (v == std::make_pair(Rat(1, 2), Rat(1, 4))) d2 = true;
  }
  CHECK(d1);
  CHECK(d2);
}

TEST_CASE("half-plane and hull membership agree on random points") {
  SplitRng rng(5);
  std::vector<ExponentRegion> regs = {{Rat(7, 10), Rat(2, 5), 1}, {Rat(1, 2), Rat(4, 5), 1}};
  for (const auto& reg : regs)
    for (RegionKind kind : {RegionKind::Delta, RegionKind::Trap, RegionKind::Pent}) {
      auto verts = region_vertices(reg, kind);
      for (int i = 0; i < 500; ++i) {
        Rat a(rng.uniform_int(101), 100), b(rng.uniform_int(101), 100);
        CHECK(region_membership(reg, kind, a, b) == hull_membership(verts, a, b));
      }
    }
}

TEST_CASE("q_star") {
  ExponentRegion reg{Rat(1, 2), Rat(4, 5), 1};
  // (4d - 4a + 2b)/b = (4 - 2 + 8/5)/(4/5)
  CHECK(q_star(reg) == Rat(9, 2));
  reg.beta = Rat(0);
  CHECK_THROWS_AS(q_star(reg), ValidationError);
}

TEST_CASE("bohr points of the desk bundle") {
  RestrictionGeoBundle b = desk_bundle();
  BohrPointSet bp = bohr_points(b, 2, Rat(9, 10), Rat(1, 2));
  CHECK(bp.m == 1);
  CHECK(bp.points.size() == 18);  // {0, 12, ..., 204}
  CHECK(bp.points.front() == LPt{Int(0)});
  CHECK(bp.points.back() == LPt{Int(204)});
  CHECK(bp.min_separation == 12.0);
  CHECK(bp.volume_lower == rat_pow(Rat(1, 2), 1) * Rat(18));
  CHECK_THROWS_AS(bohr_points(b, 1, Rat(9, 10), Rat(1, 2)), EmptyBohrSet);
}

TEST_CASE("resonance lower bound and closed form at the desk bundle") {
  RestrictionGeoBundle b = desk_bundle();
  BohrPointSet bp = bohr_points(b, 2, Rat(9, 10), Rat(1, 2));
  ExperimentReport rep = resonance_check(b, 2, bp.points);
  CHECK(rep.all_pass());
}

TEST_CASE("wn_vn energy identities") {
  RestrictionGeoBundle b = desk_bundle();
  ExperimentReport rep = wn_vn_energy(b, 2, Rat(1, 4), 512);
  CHECK(rep.all_pass());
}

TEST_CASE("frostman_fit exact verdict on a salem family") {
  ConstructionParams p = desk("salem");
  p.alpha = Rat(1, 2);
  p.depth = 2;
  SalemBuild b = build_salem(p);
  BallSchedule sched = default_ball_schedule(b.fam, 50, 3);
  ExperimentReport rep = frostman_fit(b.fam, b.target, sched, b.frost_const);
  CHECK(rep.all_pass());
  // halving the declared constant must fail
  ExperimentReport bad = frostman_fit(b.fam, b.target, sched, b.frost_const / 100);
  CHECK(!bad.all_pass());
}

TEST_CASE("report serialization and csv") {
  ExperimentReport rep;
  rep.name = "unit_report";
  rep.scalar("x", 1.5);
  rep.series["s"].push_back({1.0, 2.0});
  rep.verdict("ok", true, 1, 0);
  std::string j = rep.to_json();
  CHECK(j.find("\"unit_report\"") != std::string::npos);
  CHECK(rep.all_pass());
  rep.verdict("bad", false, 0, 0);
  CHECK(!rep.all_pass());
}

TEST_CASE("heavy core certificate passes on the desk instance") {
  ConstructionParams p = desk("heavy-core");
  p.alpha = Rat(2, 5);
  p.beta = Rat(3, 5);
  p.s_exp = Rat(0);
  p.depth = 2;
  HeavyCoreMeasure hc = build_heavy_core(p);
  ExperimentReport rep = heavy_core_certificate(hc, p.alpha);
  CHECK(rep.all_pass());
}

TEST_CASE("factorization certificate passes on the desk instance") {
  ConstructionParams p = desk("geo-factorization");
  p.alpha = Rat(7, 10);
  p.beta = Rat(2, 5);
  p.M0 = 33;
  p.depth = 2;
  FactorizedMeasure fm = build_geometric_factorization(p);
  ExperimentReport rep = factorization_certificate(fm);
  CHECK(rep.all_pass());
}
