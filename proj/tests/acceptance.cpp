// Acceptance gate: one line per criterion, nonzero exit iff any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fractal/adsample.hpp"
#include "fractal/analysis.hpp"
#include "fractal/construct.hpp"
#include "fractal/errors.hpp"
#include "fractal/flow.hpp"
#include "fractal/measure.hpp"
#include "fractal/pmf.hpp"
#include "fractal/rng.hpp"

using namespace fractal;

namespace {

int failures = 0;

template <typename F>
void criterion(int id, const std::string& desc, double budget_s, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string note;
  try {
    pass = body(note);
  } catch (const std::exception& e) {
    pass = false;
    note = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    pass = false;
    note += (note.empty() ? "" : "; ") + std::string("over time budget");
  }
  if (!pass) ++failures;
  std::printf("criterion %2d [%s] %6.2fs  %s%s%s\n", id, pass ? "PASS" : "FAIL", secs,
              desc.c_str(), note.empty() ? "" : " -- ", note.c_str());
  std::fflush(stdout);
}

ConstructionParams desk(const std::string& name) {
  ConstructionParams p;
  p.name = name;
  p.d = 1;
  p.r = 2;
  p.seed = 11;
  apply_preset(p, "desk-scale");
  return p;
}

ConstructionParams desk_salem() {
  ConstructionParams p = desk("salem");
  p.alpha = Rat(1, 2);
  p.depth = 3;
  return p;
}

ConstructionParams desk_heavy() {
  ConstructionParams p = desk("heavy-core");
  p.alpha = Rat(2, 5);
  p.beta = Rat(3, 5);
  p.s_exp = Rat(0);
  p.depth = 3;
  return p;
}

ConstructionParams desk_geo() {
  ConstructionParams p = desk("geo-factorization");
  p.alpha = Rat(7, 10);
  p.beta = Rat(2, 5);
  p.M0 = 33;
  p.depth = 3;
  return p;
}

ConstructionParams desk_resgeo() {
  ConstructionParams p = desk("restriction-geo");
  p.alpha = Rat(7, 10);
  p.beta = Rat(2, 5);
  p.R0 = 37;
  p.depth = 2;
  return p;
}

ConstructionParams desk_nongeo() {
  ConstructionParams p = desk("restriction-nongeo");
  p.alpha = Rat(1, 2);
  p.beta = Rat(4, 5);
  p.nongeo_levels = 3;
  return p;
}

std::string dump_measures(const std::vector<const DiscreteMeasure*>& ms) {
  std::ostringstream os;
  for (const auto* m : ms) write_measure(os, *m);
  return os.str();
}

void c1(ScaleSequence sc) {
  criterion(1, "refinement identity of the kernel transform", 1.0, [&](std::string& note) {
    KernelPhi k{sc.r, sc.d};
    SplitRng rng(21);
    double span = 2.0 * to_double(Rat(sc.MM.back()));
    double worst = 0;
    for (int n = 1; n <= sc.depth(); ++n)
      for (int i = 0; i < 1000; ++i) {
        std::vector<double> xi(sc.d);
        for (int l = 0; l < sc.d; ++l) xi[l] = (2 * rng.uniform_real() - 1) * span;
        std::vector<double> y(sc.d);
        for (int l = 0; l < sc.d; ++l) y[l] = xi[l] / to_double(Rat(sc.MM[n]));
        std::complex<double> lhs = phi_hat_scaled(k, sc, n - 1, xi);
        std::complex<double> rhs = char_m(sc, n, y) * phi_hat_scaled(k, sc, n, xi);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    note = "max defect " + std::to_string(worst);
    return worst <= 1e-10;
  });
}

void c2() {
  criterion(2, "Dirichlet kernel lower bound near the integers", 1.0, [&](std::string& note) {
    SplitRng rng(22);
    double worst = 1e9;
    for (long long N = 2; N <= 64; ++N)
      for (int i = 0; i < 1000; ++i) {
        long long j = static_cast<long long>(rng.uniform_int(7)) - 3;
        double u = rng.uniform_real();
        double sgn = rng.uniform_int(2) ? 1.0 : -1.0;
        double t = double(j) + sgn * u / (2.0 * double(N));
        worst = std::min(worst, std::abs(dirichlet(N, t)));
      }
    note = "min |D_N| " + std::to_string(worst);
    return worst >= 0.5;
  });
}

void c3() {
  criterion(3, "two-partition decomposition on 50 feasible instances", 30.0,
            [&](std::string& note) {
    int done = 0;
    long long max_ground = 0;
    for (int trial = 0; done < 50; ++trial) {
      int d = (trial % 5 == 4) ? 2 : 1;
      int r = 2;
      Coord M = d == 2 ? 3 + (trial % 2) : 4 + (trial % 7);
      Pmf pm = pmf_for(d, r, M);
      std::vector<Pt> ground;
      std::vector<Rat> p;
      Coord top = pm.support_max();
      std::vector<Coord> idx(d, 0);
      while (true) {
        ground.push_back(idx);
        p.push_back(pm.p(idx));
        int l = d - 1;
        for (; l >= 0; --l) {
          if (++idx[l] <= top) break;
          idx[l] = 0;
        }
        if (l < 0) break;
      }
      if (ground.size() > 200) continue;
      max_ground = std::max<long long>(max_ground, ground.size());
      BlockPartition pb = BlockPartition::plain(1 + trial % 3);
      Coord q = 1 + trial % 2;
      BlockPartition pr = BlockPartition::modular(q, q * (2 + trial % 3));
      // feasible T: floor of 1 / (max cell sum of p over both partitions)
      auto max_cell_sum = [&](const BlockPartition& bp) {
        std::map<Pt, Rat> sums;
        for (size_t i = 0; i < ground.size(); ++i) sums[block_cell_id(bp, ground[i])] += p[i];
        Rat mx(0);
        for (const auto& [c, s] : sums) mx = std::max(mx, s);
        return mx;
      };
      Rat mcs = std::max(max_cell_sum(pb), max_cell_sum(pr));
      Rat inv = Rat(1) / mcs;
      long long T = static_cast<long long>(
          Int(boost::multiprecision::numerator(inv) / boost::multiprecision::denominator(inv)));
      if (T < 1) continue;
      if (T > static_cast<long long>(ground.size())) T = ground.size();
      SamplingDistribution dist = two_partition_decompose(ground, pb, pr, T, p);
      for (size_t i = 0; i < ground.size(); ++i)
        if (dist.marginal(static_cast<int>(i)) != Rat(T) * p[i]) {
          note = "marginal mismatch";
          return false;
        }
      if (dist.atoms.size() > dist.arc_count + 1) {
        note = "too many atoms";
        return false;
      }
      for (size_t i = 0; i < dist.atoms.size(); ++i) {
        if (static_cast<long long>(dist.atoms[i].first.size()) != T) {
          note = "atom size != T";
          return false;
        }
        std::vector<Pt> pts = dist.atom_points(i);
        if (!is_block_sparse(pts, pb) || !is_block_sparse(pts, pr)) {
          note = "atom not doubly sparse";
          return false;
        }
      }
      ++done;
    }
    note = "50 instances, max ground " + std::to_string(max_ground);
    return true;
  });
}

void c4() {
  criterion(4, "AD-regular sampling: sizes, T bounds, counting structure", 60.0,
            [&](std::string& note) {
    long long realizations = 0;
    for (int d : {1, 2}) {
      for (Rat alpha : {Rat(3, 10), Rat(1, 2), Rat(4 * d, 5)}) {
        // locate the minimum admissible dyadic scale
        Coord base = 0;
        for (Coord M = 2; M <= (Coord(1) << 24); M *= 2) {
          try {
            (void)ad_sample_info(d, 2, alpha, M);
            base = M;
            break;
          } catch (const BelowMinimumScale&) {
          }
        }
        if (base == 0) {
          note = "no admissible scale";
          return false;
        }
        for (Coord M = base; M <= base * 8; M *= 2) {
          AdSampleInfo info = ad_sample_info(d, 2, alpha, M);
          Int rd = int_pow(Int(2), static_cast<unsigned long>(d));
          if (cmp_pow(Rat(info.T) / Rat(rd), Rat(M), alpha) < 0 ||
              cmp_pow(Rat(info.T) / (info.C0 * rd), Rat(M), alpha) > 0) {
            note = "T bound violated at M = " + std::to_string(M);
            return false;
          }
          SplitRng root(400 + d);
          for (int i = 0; i < 100; ++i) {
            SplitRng rng = root.child(static_cast<std::uint64_t>(M)).child(i);
            AdRegularSample s = ad_regular_sample(info, rng);
            ++realizations;
            if (Int(s.points.size()) != info.T) {
              note = "sample size != T";
              return false;
            }
            std::string why;
            if (!check_counting_bounds(info, s.seed, &why)) {
              note = "counting bounds: " + why;
              return false;
            }
          }
        }
      }
    }
    note = std::to_string(realizations) + " realizations";
    return true;
  });
}

void c5(const SalemBuild& sb) {
  criterion(5, "Salem family: Frostman fit and lower mass bounds", 60.0,
            [&](std::string& note) {
    BallSchedule sched = default_ball_schedule(sb.fam, 1000, 501);
    ExperimentReport fit = frostman_fit(sb.fam, sb.target, sched, sb.frost_const);
    if (!fit.all_pass()) {
      note = "frostman fit failed";
      return false;
    }
    BallSchedule pts = default_ball_schedule(sb.fam, 100, 502);
    ExperimentReport low = lower_mass_check(sb.fam, pts.centers, sb.target, {Rat(0)});
    if (!low.all_pass()) {
      note = "lower mass check failed";
      return false;
    }
    std::ostringstream os;
    os << sb.frost_const;
    note = "C = " + os.str();
    return true;
  });
}

void c6() {
  criterion(6, "heavy core: exact core-ball and cylinder certificates", 30.0,
            [&](std::string& note) {
    HeavyCoreMeasure hc = build_heavy_core(desk_heavy());
    ExperimentReport rep = heavy_core_certificate(hc, Rat(2, 5));
    for (const auto& v : rep.verdicts)
      if (!v.pass) {
        note = v.name + " failed: " + v.detail;
        return false;
      }
    for (const auto& [k, v] : rep.scalars)
      if (k == "nodes_checked") note = std::to_string(static_cast<long long>(v)) + " nodes";
    return true;
  });
}

void c7(const FactorizedMeasure& fm) {
  criterion(7, "geometric factorization: convolution, sparsity, difference bound", 30.0,
            [&](std::string& note) {
    ExperimentReport rep = factorization_certificate(fm);
    for (const auto& v : rep.verdicts)
      if (!v.pass) {
        note = v.name + " failed: " + v.detail;
        return false;
      }
    return true;
  });
}

void c8() {
  criterion(8, "Fourier increment concentration over 32 seeds", 300.0, [&](std::string& note) {
    std::vector<MeasureFamily> replicas;
    for (int s = 0; s < 32; ++s) {
      ConstructionParams p = desk_salem();
      p.seed = 800 + s;
      replicas.push_back(build_salem(p).fam);
    }
    ExperimentReport rep = increment_concentration(replicas, Rat(1, 4), 4096, 8.0);
    for (const auto& v : rep.verdicts)
      if (!v.pass) {
        note = v.name + ": " + std::to_string(v.value) + " > " + std::to_string(v.tolerance);
        return false;
      }
    double worst = 0;
    for (const auto& [x, y] : rep.series["max_sup"]) worst = std::max(worst, y);
    note = "max weighted sup " + std::to_string(worst);
    return true;
  });
}

void c9(const RestrictionGeoBundle& b) {
  criterion(9, "resonance lower bound at certified Bohr points", 30.0, [&](std::string& note) {
    BohrPointSet bp = bohr_points(b, 2, Rat(9, 10), Rat(1, 2));
    ExperimentReport rep = resonance_check(b, 2, bp.points);
    for (const auto& v : rep.verdicts)
      if (!v.pass) {
        note = v.name + " failed";
        return false;
      }
    note = std::to_string(bp.points.size()) + " certified points";
    return true;
  });
}

void c10(const RestrictionGeoBundle& b) {
  criterion(10, "Parseval, Cauchy-Schwarz floor, windowed energies", 60.0,
            [&](std::string& note) {
    ExperimentReport rep = wn_vn_energy(b, 2, Rat(1, 4), 10000);
    for (const auto& v : rep.verdicts)
      if (!v.pass) {
        note = v.name + " failed";
        return false;
      }
    return true;
  });
}

void c11(const FactorizedMeasure& fm) {
  criterion(11, "sharpness trends inside and outside the regions", 300.0,
            [&](std::string& note) {
    // geometric: Delta_{7/10,2/5} in d=1; interior (1/2,1/3), exterior (4/5,1/5)
    ExponentRegion gr{Rat(7, 10), Rat(2, 5), 1};
    if (!region_membership(gr, RegionKind::Delta, Rat(1, 2), Rat(1, 3)) ||
        region_membership(gr, RegionKind::Delta, Rat(4, 5), Rat(1, 5))) {
      note = "test points misclassified";
      return false;
    }
    // the natural lattice scales MM_3/MM_1, MM_3/MM_2, and one cell
    std::vector<Int> nums = {Int(1260), Int(36), Int(1)};
    ExperimentReport gi =
        conv_sharpness_geometric(fm, gr.alpha, gr.beta, Rat(1, 2), Rat(1, 3), nums, 8192);
    ExperimentReport ge =
        conv_sharpness_geometric(fm, gr.alpha, gr.beta, Rat(4, 5), Rat(1, 5), nums, 8192);
    if (!gi.all_pass()) {
      note = "geometric interior trend failed";
      return false;
    }
    if (!ge.all_pass()) {
      note = "geometric exterior trend failed";
      return false;
    }
    // nongeometric: Pent_{1/2,4/5}; interior (1/2,1/4), exterior (9/10,3/20)
    ExponentRegion nr{Rat(1, 2), Rat(4, 5), 1};
    if (!region_membership(nr, RegionKind::Pent, Rat(1, 2), Rat(1, 4)) ||
        region_membership(nr, RegionKind::Pent, Rat(9, 10), Rat(3, 20))) {
      note = "nongeometric test points misclassified";
      return false;
    }
    HeavyCoreMeasure hc = build_heavy_core(desk_heavy());
    std::vector<Rat> deltas = {Rat(1, 16), Rat(1, 64), Rat(1, 256)};
    ExperimentReport ni =
        conv_sharpness_nongeometric(hc, nr.alpha, nr.beta, Rat(1, 2), Rat(1, 4), deltas, 2048);
    ExperimentReport ne =
        conv_sharpness_nongeometric(hc, nr.alpha, nr.beta, Rat(9, 10), Rat(3, 20), deltas, 2048);
    if (!ni.all_pass()) {
      note = "nongeometric interior trend failed";
      return false;
    }
    if (!ne.all_pass()) {
      note = "nongeometric exterior trend failed";
      return false;
    }
    return true;
  });
}

void c12() {
  criterion(12, "region geometry: half-planes vs hulls, critical vertex", 10.0,
            [&](std::string& note) {
    struct Triple {
      Rat a, b;
      int d;
    };
    std::vector<Triple> triples = {{Rat(7, 10), Rat(2, 5), 1},
                                   {Rat(1, 2), Rat(4, 5), 1},
                                   {Rat(1, 2), Rat(1, 2), 1},
                                   {Rat(1), Rat(1), 2},
                                   {Rat(3, 2), Rat(1), 2}};
    SplitRng rng(1200);
    long long checked = 0;
    for (const auto& t : triples) {
      ExponentRegion reg{t.a, t.b, t.d};
      for (RegionKind kind : {RegionKind::Delta, RegionKind::Trap, RegionKind::Pent}) {
        auto verts = region_vertices(reg, kind);
        for (int i = 0; i < 10000 / 15; ++i) {
          Rat a(Int(rng.uniform_int(145)) - 12, 97);
          Rat b(Int(rng.uniform_int(145)) - 12, 97);
          ++checked;
          if (region_membership(reg, kind, a, b) != hull_membership(verts, a, b)) {
            note = "membership mismatch";
            return false;
          }
        }
      }
    }
    for (int d = 2; d <= 5; ++d) {
      ExponentRegion reg{Rat(d - 1), Rat(d - 1), d};
      auto C = critical_vertex(reg);
      if (C.first != Rat(d, d + 1) || C.second != Rat(1, d + 1)) {
        note = "critical vertex identity failed";
        return false;
      }
    }
    note = std::to_string(checked) + " points";
    return true;
  });
}

void c13() {
  criterion(13, "byte-identical reproducibility from the parameter echo", 120.0,
            [&](std::string& note) {
    {
      ConstructionParams p = desk_resgeo();
      ConstructionParams q = params_from_json(params_to_json(p));
      RestrictionGeoBundle a = build_restriction_geometric(p);
      RestrictionGeoBundle b = build_restriction_geometric(q);
      std::vector<const DiscreteMeasure*> ma, mb;
      for (const auto& m : a.combined.levels) ma.push_back(&m);
      for (const auto& m : a.eta) ma.push_back(&m);
      for (const auto& m : a.f_sub) ma.push_back(&m);
      for (const auto& m : b.combined.levels) mb.push_back(&m);
      for (const auto& m : b.eta) mb.push_back(&m);
      for (const auto& m : b.f_sub) mb.push_back(&m);
      if (dump_measures(ma) != dump_measures(mb)) {
        note = "restriction-geo rebuild differs";
        return false;
      }
    }
    {
      ConstructionParams p = desk_salem();
      ConstructionParams q = params_from_json(params_to_json(p));
      SalemBuild a = build_salem(p);
      SalemBuild b = build_salem(q);
      std::vector<const DiscreteMeasure*> ma, mb;
      for (const auto& m : a.fam.levels) ma.push_back(&m);
      for (const auto& m : b.fam.levels) mb.push_back(&m);
      if (dump_measures(ma) != dump_measures(mb)) {
        note = "salem rebuild differs";
        return false;
      }
      q.seed = p.seed + 1;
      SalemBuild c = build_salem(q);
      std::vector<const DiscreteMeasure*> mc;
      for (const auto& m : c.fam.levels) mc.push_back(&m);
      if (dump_measures(ma) == dump_measures(mc)) {
        note = "seed change had no effect";
        return false;
      }
    }
    return true;
  });
}

}  // namespace

int main() {
  SalemBuild sb = build_salem(desk_salem());
  FactorizedMeasure fm = build_geometric_factorization(desk_geo());
  RestrictionGeoBundle rb = build_restriction_geometric(desk_resgeo());

  c1(sb.fam.sc);
  c2();
  c3();
  c4();
  c5(sb);
  c6();
  c7(fm);
  c8();
  c9(rb);
  c10(rb);
  c11(fm);
  c12();
  c13();

  std::printf("%s: %d of 13 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
