#include "fractal/construct.hpp"

#include <json.hpp>

#include <algorithm>
#include <boost/integer/common_factor.hpp>
#include <map>
#include <set>
#include <utility>

#include "fractal/blocks.hpp"
#include "fractal/errors.hpp"
#include "fractal/pmf.hpp"

namespace fractal {

using nlohmann::json;

void apply_preset(ConstructionParams& p, const std::string& preset) {
  long long r = p.r;
  if (preset == "paper-constants") {
    p.c_heavy = 0;  // auto: (1/4) min_n M_n^alpha / sT_n
    p.c_q = Rat(1, 10000 * r * r);
    p.c_Q = Rat(r * r);
    p.c_T = rat_pow(Rat(r + 1), p.d);
    p.c_b = Rat(1, 2 * r);
    p.A = 10;
    p.B = Rat(100 * r * (r + 1));
    p.c_Mt = 2;
    p.c_Mb = Rat(1, 2);
    p.c_qr = Rat(1, p.A) / p.B;
    p.c_Tr = rat_pow(Rat(r + 1), p.d);
    p.c_box = Rat(1, 8);
  } else if (preset == "desk-scale") {
    p.c_heavy = Rat(1, 4);
    p.c_q = 1;
    p.c_Q = 1;
    p.c_T = Rat(1, 2);
    p.c_b = Rat(1, 2);
    p.A = 2;
    p.B = Rat(2 * r);
    p.c_Mt = 1;
    p.c_Mb = 1;
    p.c_qr = 1;
    p.c_Tr = Rat(1, 2);
    p.c_box = Rat(1, 8);
  } else {
    throw ValidationError("unknown preset: " + preset);
  }
  p.preset = preset;
}

namespace {

std::string rat_str(const Rat& x) {
  Int num = boost::multiprecision::numerator(x);
  Int den = boost::multiprecision::denominator(x);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rat json_rat(const json& v, const std::string& key) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rat(Int(v.get<long long>()));
  if (v.is_number_float()) return parse_rational(v.dump());
  throw ParseError("field '" + key + "' is not a rational");
}

Coord to_coord(const Int& v, const std::string& what) {
  if (v > Int(std::numeric_limits<Coord>::max() / 4) || v < 0)
    throw DegenerateParameters(what + " out of integer range");
  return v.convert_to<Coord>();
}

/// Minimal n0 with 2^((d - expo) n0) >= r^d (see the sampler's seed scheme).
int seed_n0(int d, int r, const Rat& expo) {
  if (expo <= 0 || expo >= d) throw DegenerateAlpha(rat_str(expo));
  Rat gap = Rat(d) - expo;
  Rat rd = rat_pow(Rat(r), d);
  int n0 = 1;
  while (cmp_pow(rd, Rat(2), gap * n0) > 0) ++n0;
  return n0;
}

MeasureFamily expand_family(const ScaleSequence& sc, OffspringAssignment a, int depth,
                            std::vector<Int> profile) {
  MeasureFamily f;
  f.sc = sc;
  for (int n = 1; n <= depth; ++n)
    f.levels.push_back(measure_from_leaves(sc, expand_tree(sc, a, n), a.order));
  f.assignment = std::move(a);
  f.profile = std::move(profile);
  return f;
}

/// {0, step, ..., step*(count-1)}^d, lexicographically sorted.
std::vector<Pt> box_points(int d, Coord count, Coord step) {
  if (count < 1 || step < 1) throw DegenerateParameters("empty box");
  std::vector<Pt> out;
  Pt u(d, 0);
  while (true) {
    Pt v(d);
    for (int l = 0; l < d; ++l) v[l] = u[l] * step;
    out.push_back(std::move(v));
    int l = d - 1;
    for (; l >= 0; --l) {
      if (++u[l] < count) break;
      u[l] = 0;
    }
    if (l < 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Audited Frostman constant over lattice balls: max over levels n, scales
/// k <= n and atom centers a of mu_n(B(a, 2/MM_k)) * upper(MM_k^expo). Sound
/// for arbitrary centers at radii 1/MM_k since any such ball is contained in
/// B(a, 2/MM_k) for some atom a it charges.
Rat audit_frostman(const MeasureFamily& fam, const Rat& expo) {
  Rat C(0);
  for (size_t li = 0; li < fam.levels.size(); ++li) {
    int n = static_cast<int>(li) + 1;
    const DiscreteMeasure& mu = fam.levels[li];
    // Common denominator of the level's masses keeps the inner loop integral.
    Int denom = 1;
    for (const auto& [a, m] : mu.atoms)
      denom = boost::multiprecision::lcm(denom, boost::multiprecision::denominator(m));
    std::vector<const LPt*> pts;
    std::vector<Int> num;
    pts.reserve(mu.atoms.size());
    for (const auto& [a, m] : mu.atoms) {
      pts.push_back(&a);
      num.push_back(boost::multiprecision::numerator(m) * (denom / boost::multiprecision::denominator(m)));
    }
    for (int k = 1; k <= n; ++k) {
      Int rad = 2 * (fam.sc.MM[n] / fam.sc.MM[k]);
      Int r2 = rad * rad;
      Rat scale = dyadic_upper_pow(Rat(fam.sc.MM[k]), expo);
      for (size_t i = 0; i < pts.size(); ++i) {
        Int mass = 0;
        for (size_t j = 0; j < pts.size(); ++j) {
          Int s = 0;
          for (int l = 0; l < mu.d; ++l) {
            Int dlt = (*pts[i])[l] - (*pts[j])[l];
            s += dlt * dlt;
          }
          if (s < r2) mass += num[j];
        }
        Rat cand = Rat(mass, denom) * scale;
        if (cand > C) C = cand;
      }
    }
  }
  return C;
}

void check_common(const ConstructionParams& p) {
  if (p.d < 1) throw ValidationError("d must be >= 1");
  if (p.depth < 1) throw ValidationError("depth must be >= 1");
  if (Rat(p.r) <= std::max({Rat(1), Rat(p.alpha / 2), Rat(p.beta / 2)}))
    throw ValidationError("requires r > max{1, alpha/2, beta/2}");
}

}  // namespace

ConstructionParams params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("parameter document must be a JSON object");
  ConstructionParams p;
  try {
    if (j.contains("construction")) p.name = j.at("construction").get<std::string>();
    else if (j.contains("name")) p.name = j.at("name").get<std::string>();
    if (j.contains("d")) p.d = j.at("d").get<int>();
    if (j.contains("r")) p.r = j.at("r").get<int>();
    apply_preset(p, j.value("preset", std::string("paper-constants")));
    if (j.contains("alpha")) p.alpha = json_rat(j.at("alpha"), "alpha");
    if (j.contains("beta")) p.beta = json_rat(j.at("beta"), "beta");
    if (j.contains("s")) p.s_exp = json_rat(j.at("s"), "s");
    if (j.contains("depth")) p.depth = j.at("depth").get<int>();
    if (j.contains("schedule"))
      p.schedule = j.at("schedule").get<std::vector<Coord>>();
    if (j.contains("M0")) p.M0 = j.at("M0").get<Coord>();
    if (j.contains("R0")) p.R0 = j.at("R0").get<Coord>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("nongeo_levels")) p.nongeo_levels = j.at("nongeo_levels").get<int>();
    if (j.contains("overrides")) {
      const json& o = j.at("overrides");
      if (!o.is_object()) throw ParseError("overrides must be an object");
      auto rat = [&](const char* key, Rat& dst) {
        if (o.contains(key)) dst = json_rat(o.at(key), key);
      };
      rat("c_heavy", p.c_heavy);
      rat("c_q", p.c_q);
      rat("c_Q", p.c_Q);
      rat("c_T", p.c_T);
      rat("c_b", p.c_b);
      rat("B", p.B);
      rat("c_Mt", p.c_Mt);
      rat("c_Mb", p.c_Mb);
      rat("c_qr", p.c_qr);
      rat("c_Tr", p.c_Tr);
      rat("c_box", p.c_box);
      if (o.contains("A")) p.A = o.at("A").get<long long>();
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  return p;
}

std::string params_to_json(const ConstructionParams& p) {
  json j;
  j["construction"] = p.name;
  j["d"] = p.d;
  j["r"] = p.r;
  j["alpha"] = rat_str(p.alpha);
  j["beta"] = rat_str(p.beta);
  j["s"] = rat_str(p.s_exp);
  j["depth"] = p.depth;
  j["schedule"] = p.schedule;
  j["M0"] = p.M0;
  j["R0"] = p.R0;
  j["seed"] = p.seed;
  j["nongeo_levels"] = p.nongeo_levels;
  if (!p.preset.empty()) j["preset"] = p.preset;
  json o;
  o["c_heavy"] = rat_str(p.c_heavy);
  o["c_q"] = rat_str(p.c_q);
  o["c_Q"] = rat_str(p.c_Q);
  o["c_T"] = rat_str(p.c_T);
  o["c_b"] = rat_str(p.c_b);
  o["A"] = p.A;
  o["B"] = rat_str(p.B);
  o["c_Mt"] = rat_str(p.c_Mt);
  o["c_Mb"] = rat_str(p.c_Mb);
  o["c_qr"] = rat_str(p.c_qr);
  o["c_Tr"] = rat_str(p.c_Tr);
  o["c_box"] = rat_str(p.c_box);
  j["overrides"] = std::move(o);
  return j.dump(2) + "\n";
}

DiscreteMeasure lift_measure(const DiscreteMeasure& mu, int new_level, const Int& new_den) {
  if (new_den % mu.den != 0) throw ModulusNotDivisible("lift denominator");
  Int scale = new_den / mu.den;
  DiscreteMeasure out;
  out.d = mu.d;
  out.level = new_level;
  out.den = new_den;
  for (const auto& [a, m] : mu.atoms) {
    LPt b(a.size());
    for (size_t l = 0; l < a.size(); ++l) b[l] = a[l] * scale;
    out.add(b, m);
  }
  return out;
}

SalemBuild build_salem_with(const ConstructionParams& p, const Rat& exponent) {
  check_common(p);
  std::vector<Coord> M = p.schedule;
  if (M.empty()) M = default_dyadic_schedule(seed_n0(p.d, p.r, exponent), p.depth);
  if (static_cast<int>(M.size()) < p.depth) throw ValidationError("schedule shorter than depth");
  M.resize(p.depth);
  ScaleSequence sc = make_scales(p.d, p.r, M);

  SalemBuild out;
  out.target = exponent;
  std::vector<Int> profile;
  for (int n = 1; n <= p.depth; ++n) {
    out.info.push_back(ad_sample_info(p.d, p.r, exponent, M[n - 1]));
    profile.push_back(out.info.back().T);
  }

  OffspringAssignment a;
  a.order = p.r;
  a.depth = p.depth;
  SplitRng root(p.seed);
  std::vector<Word> nodes{Word{}};
  for (int n = 1; n <= p.depth; ++n) {
    SplitRng lvl = root.child(static_cast<std::uint64_t>(n));
    std::vector<Word> next;
    for (size_t i = 0; i < nodes.size(); ++i) {
      SplitRng nrng = lvl.child(i);
      AdRegularSample s = ad_regular_sample(out.info[n - 1], nrng);
      a.set_uniform(nodes[i], s.points);
      if (n < p.depth) {
        next.reserve(next.size() + s.points.size());
        for (const auto& u : s.points) {
          Word w = nodes[i];
          w.push_back(u);
          next.push_back(std::move(w));
        }
      }
    }
    nodes = std::move(next);
  }
  out.fam = expand_family(sc, std::move(a), p.depth, std::move(profile));
  return out;
}

SalemBuild build_salem(const ConstructionParams& p) {
  SalemBuild out = build_salem_with(p, p.alpha);
  out.frost_const = audit_frostman(out.fam, out.target);
  return out;
}

HeavyCoreMeasure build_heavy_core(const ConstructionParams& p) {
  check_common(p);
  if (!(p.alpha < p.beta)) throw PreconditionViolated("heavy core requires alpha < beta");
  if (p.beta <= 0 || p.beta > p.d || 2 * p.alpha < p.beta)
    throw PreconditionViolated("requires 0 < beta <= d and beta/2 <= alpha");
  if (p.s_exp < 0 || p.s_exp > 2 * p.alpha - p.beta) throw InvalidS(rat_str(p.s_exp));

  std::vector<Coord> M = p.schedule;
  if (M.empty()) M = default_dyadic_schedule(seed_n0(p.d, p.r, p.beta), p.depth);
  if (static_cast<int>(M.size()) < p.depth) throw ValidationError("schedule shorter than depth");
  M.resize(p.depth);
  ScaleSequence sc = make_scales(p.d, p.r, M);
  Int rd = int_pow(p.r, static_cast<unsigned long>(p.d));

  HeavyCoreMeasure out;
  std::vector<AdSampleInfo> binfo, sinfo;
  for (int n = 1; n <= p.depth; ++n) {
    binfo.push_back(ad_sample_info(p.d, p.r, p.beta, M[n - 1]));
    out.bT.push_back(binfo.back().T);
    if (p.s_exp > 0) {
      sinfo.push_back(ad_sample_info(p.d, p.r, p.s_exp, M[n - 1]));
      out.sT.push_back(sinfo.back().T);
    } else {
      out.sT.push_back(1);
    }
  }

  out.c = p.c_heavy;
  if (out.c == 0) {
    // Default: a dyadic lower bound of (1/4) min_n M_n^alpha / sT_n.
    for (int n = 1; n <= p.depth; ++n) {
      Rat cand = dyadic_lower_pow(Rat(M[n - 1]), p.alpha) / (4 * Rat(out.sT[n - 1]));
      if (n == 1 || cand < out.c) out.c = cand;
    }
  }
  if (out.c <= 0) throw LambdaTooLarge("core constant must be positive");

  for (int n = 1; n <= p.depth; ++n) {
    // lambda_n >= c sT_n M_n^-alpha, rounded up in 64-bit dyadics so the core
    // mass bound prod lambda_k / sT_k >= c^n MM_n^-alpha survives exactly.
    Rat lam = out.c * Rat(out.sT[n - 1]) * dyadic_upper_pow(Rat(M[n - 1]), -p.alpha);
    if (lam <= 0 || lam >= Rat(1, 2))
      throw LambdaTooLarge("lambda_" + std::to_string(n) + " = " + rat_str(lam));
    Rat kmax = (1 - lam) / Rat(out.bT[n - 1]) + lam / Rat(out.sT[n - 1]);
    if (cmp_pow(kmax * rd, Rat(M[n - 1]), -p.alpha) > 0)
      throw LambdaTooLarge("edge mass exceeds r^-d M^-alpha at level " + std::to_string(n));
    out.lambda.push_back(lam);
  }

  OffspringAssignment a;
  a.order = p.r;
  a.depth = p.depth;
  SplitRng root(p.seed);
  struct HNode {
    Word w;
    bool core;
    Rat core_mass;
  };
  std::vector<HNode> nodes{{Word{}, true, Rat(1)}};
  out.cores.clear();
  for (int n = 1; n <= p.depth; ++n) {
    SplitRng lvl = root.child(static_cast<std::uint64_t>(n));
    const Rat& lam = out.lambda[n - 1];
    Rat beta_edge = (1 - lam) / Rat(out.bT[n - 1]);
    Rat s_edge = lam / Rat(out.sT[n - 1]);
    TreeLeafSet core_level;
    core_level.depth = n;
    std::vector<HNode> next;
    for (size_t i = 0; i < nodes.size(); ++i) {
      SplitRng nrng = lvl.child(i);
      SplitRng brng = nrng.child(0);
      std::vector<Pt> bS = ad_regular_sample(binfo[n - 1], brng).points;
      std::vector<Pt> sS;
      if (p.s_exp > 0) {
        SplitRng srng = nrng.child(1);
        sS = ad_regular_sample(sinfo[n - 1], srng).points;
      } else {
        SplitRng srng = nrng.child(1);
        Pt u(p.d, 0);
        for (int k = 0; k < p.r; ++k)
          for (int l = 0; l < p.d; ++l)
            u[l] += static_cast<Coord>(srng.uniform_int(static_cast<std::uint64_t>(M[n - 1])));
        sS.push_back(std::move(u));
      }
      std::map<Pt, Rat> edge;
      for (const auto& u : bS) edge[u] += beta_edge;
      for (const auto& u : sS) edge[u] += s_edge;
      a.set_weighted(nodes[i].w, edge);
      for (const auto& [u, kappa] : edge) {
        bool core_child = nodes[i].core &&
                          std::binary_search(sS.begin(), sS.end(), u);
        Word w = nodes[i].w;
        w.push_back(u);
        Rat cm = core_child ? nodes[i].core_mass * kappa : Rat(0);
        if (core_child) core_level.leaves.push_back({w, cm});
        if (n < p.depth) next.push_back({std::move(w), core_child, cm});
      }
    }
    out.cores.push_back(std::move(core_level));
    nodes = std::move(next);
  }
  out.fam = expand_family(sc, std::move(a), p.depth, {});
  return out;
}

FactorizedMeasure build_geometric_factorization(const ConstructionParams& p) {
  check_common(p);
  if (p.beta > p.alpha) throw PreconditionViolated("factorization requires beta <= alpha");
  if (p.alpha <= 0 || p.alpha >= p.d || p.beta <= 0)
    throw PreconditionViolated("requires 0 < beta <= alpha < d");

  if (p.beta == p.alpha) {
    // Shortcut: the structured factor degenerates to a point mass at 0.
    SalemBuild s = build_salem_with(p, p.alpha);
    FactorizedMeasure out;
    out.sc = s.fam.sc;
    out.dirac_shortcut = true;
    out.random = s.fam;
    out.combined = s.fam;
    OffspringAssignment ga;
    ga.order = 1;
    ga.depth = p.depth;
    Word w;
    for (int n = 0; n <= p.depth; ++n) {
      if (n > 0) w.push_back(Pt(p.d, 0));
      if (n < p.depth) ga.set_uniform(w, {Pt(p.d, 0)});
    }
    OffspringAssignment ga2 = ga;
    out.grid = expand_family(out.sc, std::move(ga2), p.depth, {});
    for (int n = 1; n <= p.depth; ++n)
      out.param.push_back({out.sc.M[n - 1], 1, 1, 1, 1, Int(1)});
    return out;
  }

  std::vector<Coord> M = p.schedule;
  if (M.empty()) {
    if (p.M0 < 1) throw ValidationError("geo factorization needs a schedule or M0 >= 1");
    for (int n = 1; n <= p.depth; ++n) M.push_back(p.M0 + n);
  }
  if (static_cast<int>(M.size()) < p.depth) throw ValidationError("schedule shorter than depth");
  M.resize(p.depth);
  ScaleSequence sc = make_scales(p.d, p.r, M);

  FactorizedMeasure out;
  out.sc = sc;
  for (int n = 1; n <= p.depth; ++n) {
    Rat Mn(M[n - 1]);
    GeoFactorLevel lv;
    lv.M = M[n - 1];
    lv.Mt = to_coord(ceil_pow(Mn, (p.alpha - p.beta) / Rat(p.d)), "Mt");
    lv.q = to_coord(floor_scaled_pow(p.c_q, Mn, 1 - p.alpha / Rat(p.d)), "q");
    Coord qmul = to_coord(floor_scaled_pow(p.c_Q, Mn, p.beta / Rat(p.d)), "Q/q");
    lv.b = to_coord(floor_scaled_pow(p.c_b, Mn, 1 - p.beta / Rat(p.d)), "b");
    lv.Tbar = ceil_scaled_pow(p.c_T, Mn, p.beta);
    if (lv.Mt < 1 || lv.q < 1 || qmul < 1 || lv.b < 1 || lv.Tbar < 1)
      throw DegenerateParameters("derived integer < 1 at level " + std::to_string(n));
    lv.Q = lv.q * qmul;
    if (lv.Q % lv.q != 0) throw DivisibilityViolated("q | Q");
    if (!(Int(lv.Mt) * lv.Q < Int(lv.M)))
      throw DegenerateParameters("Mt * Q >= M at level " + std::to_string(n));
    out.param.push_back(lv);
  }

  // Structured factor: every node branches into the full grid.
  OffspringAssignment ga;
  ga.order = 1;
  ga.depth = p.depth;
  std::vector<std::vector<Pt>> grids;
  for (int n = 1; n <= p.depth; ++n)
    grids.push_back(box_points(p.d, out.param[n - 1].Mt, out.param[n - 1].Q));
  {
    std::vector<Word> nodes{Word{}};
    for (int n = 1; n <= p.depth; ++n) {
      std::vector<Word> next;
      for (const auto& w : nodes) {
        ga.set_uniform(w, grids[n - 1]);
        if (n < p.depth)
          for (const auto& u : grids[n - 1]) {
            Word c = w;
            c.push_back(u);
            next.push_back(std::move(c));
          }
      }
      nodes = std::move(next);
    }
  }

  // Random factor: two-partition flow sampling on the full digit set.
  OffspringAssignment ra;
  ra.order = p.r;
  ra.depth = p.depth;
  SplitRng root(p.seed);
  std::vector<SamplingDistribution> dists;
  for (int n = 1; n <= p.depth; ++n) {
    const GeoFactorLevel& lv = out.param[n - 1];
    Pmf q = pmf(sc, n);
    std::vector<Pt> ground = box_points(p.d, q.support_max() + 1, 1);
    std::vector<Rat> pv(ground.size());
    for (size_t i = 0; i < ground.size(); ++i) pv[i] = q.p(ground[i]);
    dists.push_back(two_partition_decompose(ground, BlockPartition::plain(lv.b),
                                            BlockPartition::modular(lv.q, lv.Q),
                                            lv.Tbar.convert_to<long long>(), pv));
  }
  {
    std::vector<Word> nodes{Word{}};
    for (int n = 1; n <= p.depth; ++n) {
      SplitRng lvl = root.child(static_cast<std::uint64_t>(n));
      std::vector<Word> next;
      for (size_t i = 0; i < nodes.size(); ++i) {
        SplitRng nrng = lvl.child(i);
        std::vector<Pt> S = two_partition_draw(dists[n - 1], nrng);
        ra.set_uniform(nodes[i], S);
        if (n < p.depth)
          for (const auto& u : S) {
            Word w = nodes[i];
            w.push_back(u);
            next.push_back(std::move(w));
          }
      }
      nodes = std::move(next);
    }
  }

  // Combined system: certified residue-separated sums of the two factors.
  OffspringAssignment ca;
  ca.order = p.r + 1;
  ca.depth = p.depth;
  struct Triple {
    Word comb, wt, wb;
  };
  std::vector<Triple> cur{{Word{}, Word{}, Word{}}};
  for (int n = 1; n <= p.depth; ++n) {
    const GeoFactorLevel& lv = out.param[n - 1];
    std::vector<Triple> next;
    for (const auto& t : cur) {
      std::vector<Pt> Sb;
      for (const auto& [u, m] : ra.children.at(t.wb)) Sb.push_back(u);
      SumsetResult res = residue_separated_sum(grids[n - 1], Sb, lv.q, lv.Q);
      ca.set_uniform(t.comb, res.sum);
      if (n < p.depth)
        for (size_t i = 0; i < res.sum.size(); ++i) {
          Triple nt;
          nt.comb = t.comb;
          nt.comb.push_back(res.sum[i]);
          nt.wt = t.wt;
          nt.wt.push_back(res.witness[i].first);
          nt.wb = t.wb;
          nt.wb.push_back(res.witness[i].second);
          next.push_back(std::move(nt));
        }
    }
    cur = std::move(next);
  }

  std::vector<Int> rprof;
  for (const auto& lv : out.param) rprof.push_back(lv.Tbar);
  out.grid = expand_family(sc, std::move(ga), p.depth, {});
  out.random = expand_family(sc, std::move(ra), p.depth, rprof);
  out.combined = expand_family(sc, std::move(ca), p.depth, {});
  return out;
}

RestrictionGeoBundle build_restriction_geometric(const ConstructionParams& p) {
  check_common(p);
  if (p.beta > p.alpha) throw PreconditionViolated("requires beta <= alpha");
  if (p.alpha <= 0 || p.alpha >= p.d || p.beta <= 0)
    throw PreconditionViolated("requires 0 < beta <= alpha < d");
  if (p.R0 < 1) throw ValidationError("R0 >= 1 required");
  if (p.A < 1) throw ValidationError("A >= 1 required");

  RestrictionGeoBundle out;
  out.A = p.A;
  Int rd = int_pow(p.r, static_cast<unsigned long>(p.d));
  std::vector<Coord> M;
  for (int n = 1; n <= p.depth; ++n) {
    Rat Rn(p.R0 + n);
    ResGeoLevel lv;
    lv.R = p.R0 + n;
    lv.Mt = to_coord(ceil_scaled_pow(p.c_Mt, Rn, (p.alpha - p.beta) / Rat(p.d)), "Mt");
    lv.Mb = to_coord(floor_scaled_pow(p.c_Mb, Rn, p.beta / Rat(2 * p.d)), "Mb");
    lv.ell = to_coord(ceil_scaled_pow(p.B, Rn, p.beta / Rat(2 * p.d)), "ell");
    lv.qb = to_coord(floor_scaled_pow(p.c_qr, Rn, (Rat(p.d) - p.alpha) / Rat(p.d)), "qb");
    if (lv.Mt < 1 || lv.Mb < 1 || lv.ell < 1 || lv.qb < 1)
      throw DegenerateParameters("derived integer < 1 at level " + std::to_string(n));
    lv.Qb = lv.ell * lv.qb;
    lv.Qt = lv.Mb * lv.Qb;
    lv.M = to_coord(Int(p.A) * lv.Mt * lv.Mb * lv.ell * lv.qb, "M");
    lv.T = ceil_scaled_pow(p.c_Tr, Rat(lv.M), p.beta);
    if (lv.T < 1) throw DegenerateParameters("T < 1");
    if (int_pow(Int(lv.Mb) * lv.ell, static_cast<unsigned long>(p.d)) < rd * lv.T)
      throw DegenerateParameters("light-block inequality fails at level " + std::to_string(n));
    lv.Db = box_points(p.d, lv.Mb, lv.Qb);
    M.push_back(lv.M);
    out.param.push_back(std::move(lv));
  }
  ScaleSequence sc = make_scales(p.d, p.r, M);
  out.sc = sc;
  for (int n = 1; n <= p.depth; ++n) {
    ResGeoLevel& lv = out.param[n - 1];
    lv.L = Int(p.A) * lv.Mb * lv.Mt * sc.MM[n - 1];
    // Deterministic offspring: Db plus unused qb-block corners, filled in
    // increasing order until #Hb = T.
    BlockPartition cells = BlockPartition::modular(lv.qb, lv.Qt);
    if (!is_block_sparse(lv.Db, cells))
      throw SubtreeNotSparse("arithmetic pattern at level " + std::to_string(n));
    std::set<Pt> used;
    for (const auto& u : lv.Db) used.insert(block_cell_id(cells, u));
    lv.Hb = lv.Db;
    long long want = lv.T.convert_to<long long>();
    std::vector<Pt> corners = box_points(p.d, lv.Qt / lv.qb, lv.qb);
    for (const auto& b : corners) {
      if (static_cast<long long>(lv.Hb.size()) >= want) break;
      if (used.insert(block_cell_id(cells, b)).second) lv.Hb.push_back(b);
    }
    if (static_cast<long long>(lv.Hb.size()) != want)
      throw SubtreeNotSparse("cannot fill Hb to size T at level " + std::to_string(n));
    std::sort(lv.Hb.begin(), lv.Hb.end());
    if (!is_block_sparse(lv.Hb, cells)) throw SubtreeNotSparse("Hb not block sparse");
  }

  // Structured factor on the coarse grid Qt * {0..Mt-1}^d.
  OffspringAssignment ga;
  ga.order = 1;
  ga.depth = p.depth;
  std::vector<std::vector<Pt>> grids;
  for (int n = 1; n <= p.depth; ++n)
    grids.push_back(box_points(p.d, out.param[n - 1].Mt, out.param[n - 1].Qt));
  {
    std::vector<Word> nodes{Word{}};
    for (int n = 1; n <= p.depth; ++n) {
      std::vector<Word> next;
      for (const auto& w : nodes) {
        ga.set_uniform(w, grids[n - 1]);
        if (n < p.depth)
          for (const auto& u : grids[n - 1]) {
            Word c = w;
            c.push_back(u);
            next.push_back(std::move(c));
          }
      }
      nodes = std::move(next);
    }
  }

  // Random factor: deterministic Hb on arithmetic-prefix nodes, two-partition
  // draws elsewhere. Arithmetic nodes consume no randomness.
  OffspringAssignment ra;
  ra.order = p.r;
  ra.depth = p.depth;
  SplitRng root(p.seed);
  std::vector<SamplingDistribution> dists(p.depth);
  std::vector<char> have_dist(p.depth, 0);
  auto level_dist = [&](int n) -> const SamplingDistribution& {
    if (!have_dist[n - 1]) {
      const ResGeoLevel& lv = out.param[n - 1];
      Pmf q = pmf(sc, n);
      std::vector<Pt> ground = box_points(p.d, q.support_max() + 1, 1);
      std::vector<Rat> pv(ground.size());
      for (size_t i = 0; i < ground.size(); ++i) pv[i] = q.p(ground[i]);
      dists[n - 1] = two_partition_decompose(ground, BlockPartition::plain(1),
                                             BlockPartition::modular(lv.qb, lv.Qt),
                                             lv.T.convert_to<long long>(), pv);
      have_dist[n - 1] = 1;
    }
    return dists[n - 1];
  };
  {
    struct RNode {
      Word w;
      bool ar;
    };
    std::vector<RNode> nodes{{Word{}, true}};
    for (int n = 1; n <= p.depth; ++n) {
      const ResGeoLevel& lv = out.param[n - 1];
      std::set<Pt> db_set(lv.Db.begin(), lv.Db.end());
      SplitRng lvl = root.child(static_cast<std::uint64_t>(n));
      std::vector<RNode> next;
      for (size_t i = 0; i < nodes.size(); ++i) {
        std::vector<Pt> S;
        if (nodes[i].ar) {
          S = lv.Hb;
        } else {
          SplitRng nrng = lvl.child(i);
          S = two_partition_draw(level_dist(n), nrng);
        }
        ra.set_uniform(nodes[i].w, S);
        if (n < p.depth)
          for (const auto& u : S) {
            Word w = nodes[i].w;
            w.push_back(u);
            next.push_back({std::move(w), nodes[i].ar && db_set.count(u) > 0});
          }
      }
      nodes = std::move(next);
    }
  }

  // Combined system plus the arithmetic-prefix sub-measures f_n.
  OffspringAssignment ca;
  ca.order = p.r + 1;
  ca.depth = p.depth;
  struct Triple {
    Word comb, wb;
    int ar_len;
    bool ar;
  };
  std::vector<Triple> cur{{Word{}, Word{}, 0, true}};
  for (int n = 1; n <= p.depth; ++n) {
    const ResGeoLevel& lv = out.param[n - 1];
    std::set<Pt> db_set(lv.Db.begin(), lv.Db.end());
    std::vector<Triple> next;
    for (const auto& t : cur) {
      std::vector<Pt> Sb;
      for (const auto& [u, m] : ra.children.at(t.wb)) Sb.push_back(u);
      SumsetResult res = residue_separated_sum(grids[n - 1], Sb, lv.qb, lv.Qt);
      ca.set_uniform(t.comb, res.sum);
      for (size_t i = 0; i < res.sum.size(); ++i) {
        Triple nt;
        nt.comb = t.comb;
        nt.comb.push_back(res.sum[i]);
        nt.wb = t.wb;
        nt.wb.push_back(res.witness[i].second);
        nt.ar = t.ar && db_set.count(res.witness[i].second) > 0;
        nt.ar_len = nt.ar ? n : t.ar_len;
        next.push_back(std::move(nt));
      }
    }
    cur = std::move(next);
  }
  {
    Rat leaf_mass(1);
    for (const auto& lv : out.param)
      leaf_mass /= rat_pow(Rat(lv.Mt), p.d) * Rat(lv.T);
    out.f_sub.assign(p.depth, DiscreteMeasure{});
    for (int n = 1; n <= p.depth; ++n) {
      out.f_sub[n - 1].d = p.d;
      out.f_sub[n - 1].level = p.depth;
      out.f_sub[n - 1].den = sc.MM[p.depth];
    }
    for (const auto& t : cur) {
      LPt a = coding_point(sc, t.comb, p.r + 1).lattice;
      for (int n = 1; n <= t.ar_len; ++n) out.f_sub[n - 1].add(a, leaf_mass);
    }
  }

  // eta_n: iterated convolution of the arithmetic level patterns.
  {
    DiscreteMeasure e = dirac_zero(p.d, 0, 1);
    Rat tau(1);
    for (int n = 1; n <= p.depth; ++n) {
      const ResGeoLevel& lv = out.param[n - 1];
      DiscreteMeasure pat;
      pat.d = p.d;
      pat.level = n;
      pat.den = sc.MM[n];
      Rat w = Rat(1) / Rat(lv.T);
      for (const auto& u : lv.Db) pat.add(LPt(u.begin(), u.end()), w);
      e = convolve(lift_measure(e, n, sc.MM[n]), pat);
      out.eta.push_back(e);
      tau *= rat_pow(Rat(lv.Mb), p.d) / Rat(lv.T);
      out.tau_ar.push_back(tau);
    }
  }

  std::vector<Int> rprof;
  for (const auto& lv : out.param) rprof.push_back(lv.T);
  out.grid = expand_family(sc, std::move(ga), p.depth, {});
  out.random = expand_family(sc, std::move(ra), p.depth, rprof);
  out.combined = expand_family(sc, std::move(ca), p.depth, {});
  return out;
}

RestrictionNongeoFamily build_restriction_nongeometric(const ConstructionParams& p) {
  check_common(p);
  if (!(p.beta > 0 && p.beta <= p.d && 2 * p.alpha >= p.beta && p.alpha < p.beta))
    throw PreconditionViolated("requires beta/2 <= alpha < beta");
  int cap = p.nongeo_levels;
  if (cap < 1) throw ValidationError("nongeo_levels >= 1");

  std::vector<Coord> rho(cap);
  std::vector<Int> need(cap);
  Int max_need = 0;
  for (int n = 1; n <= cap; ++n) {
    rho[n - 1] = to_coord(ceil_pow(Rat(2), Rat(n) * (2 * p.alpha - p.beta) / Rat(p.d)), "rho");
    need[n - 1] = int_pow(2, static_cast<unsigned long>(3 * n)) * rho[n - 1];
    if (need[n - 1] > max_need) max_need = need[n - 1];
  }

  // Truncation depth of the base measure: smallest depth whose scale product
  // covers every level's alignment requirement, with a hard work bound.
  int n0 = seed_n0(p.d, p.r, p.beta);
  int depth = 0;
  Int MM = 1;
  while (MM < max_need) {
    ++depth;
    if (n0 + depth > 40) throw ScaleAlignment("base truncation too deep");
    MM *= Coord(1) << (n0 + depth);
  }
  if (depth == 0) depth = 1;
  {
    Int leaves = 1;
    Int mm = 1;
    for (int k = 1; k <= depth; ++k) {
      mm *= Coord(1) << (n0 + k);
      leaves = mm;  // T_k <= M_k, so MM bounds the leaf count per coordinate
    }
    if (int_pow(leaves, static_cast<unsigned long>(p.d)) > 4'000'000)
      throw ScaleAlignment("base truncation too large to materialize");
  }
  ConstructionParams ps = p;
  ps.schedule.clear();
  ps.depth = depth;
  RestrictionNongeoFamily out;
  out.sigma = build_salem_with(ps, p.beta);
  out.c_box = p.c_box;
  out.frost_scale_alpha = dyadic_upper_pow(Rat(p.r), p.alpha);
  out.frost_scale_beta = dyadic_upper_pow(Rat(p.r), p.beta);
  const ScaleSequence& ssc = out.sigma.fam.sc;

  std::vector<int> kn(cap);
  for (int n = 1; n <= cap; ++n) {
    int k = 1;
    while (k <= depth && ssc.MM[k] < need[n - 1]) ++k;
    if (k > depth) throw ScaleAlignment("no admissible truncation for level " + std::to_string(n));
    kn[n - 1] = k;
  }

  Int D = 1;
  for (int n = 1; n <= cap; ++n) {
    Int dn = int_pow(2, static_cast<unsigned long>(2 * n)) * p.r * ssc.MM[kn[n - 1]];
    D = boost::multiprecision::lcm(D, dn);
    D = boost::multiprecision::lcm(D, Int(int_pow(2, static_cast<unsigned long>(n)) * rho[n - 1]));
  }

  out.W = 0;
  for (int n = 1; n <= cap; ++n) {
    NongeoLevel lv;
    lv.n = n;
    lv.rho = rho[n - 1];
    lv.z_count = int_pow(rho[n - 1], static_cast<unsigned long>(p.d));
    lv.sigma_depth = kn[n - 1];
    lv.t.assign(p.d, Rat(0));
    if (n > 1) {
      // t_n = 100 d (1 - 2^(1-n)) e_1
      Int denom = int_pow(2, static_cast<unsigned long>(n - 1));
      lv.t[0] = Rat(100 * p.d) * Rat(denom - 1, denom);
    }
    lv.weight = dyadic_lower_pow(Rat(2), -p.beta * n) / Rat(Int(n) * n);
    if (lv.weight <= 0) throw ScaleAlignment("vanishing mixture weight");

    const DiscreteMeasure& sig = out.sigma.fam.levels[kn[n - 1] - 1];
    lv.nu.d = p.d;
    lv.nu.level = n;
    lv.nu.den = D;
    Int t_lat0 = n > 1 ? Int(boost::multiprecision::numerator(lv.t[0]) *
                             (D / boost::multiprecision::denominator(lv.t[0])))
                       : Int(0);
    Int z_step = D / (int_pow(2, static_cast<unsigned long>(n)) * rho[n - 1]);
    Int a_step = D / (int_pow(2, static_cast<unsigned long>(2 * n)) * p.r * ssc.MM[kn[n - 1]]);
    Rat zmass = Rat(1, lv.z_count);
    Pt j(p.d, 0);
    while (true) {
      for (const auto& [a, m] : sig.atoms) {
        LPt pos(p.d);
        for (int l = 0; l < p.d; ++l) {
          pos[l] = Int(j[l]) * z_step + a[l] * a_step;
          if (l == 0) pos[l] += t_lat0;
        }
        lv.nu.add(pos, m * zmass);
      }
      int l = p.d - 1;
      for (; l >= 0; --l) {
        if (++j[l] < rho[n - 1]) break;
        j[l] = 0;
      }
      if (l < 0) break;
    }
    out.W += lv.weight;
    out.levels.push_back(std::move(lv));
  }

  out.mu.d = p.d;
  out.mu.level = cap;
  out.mu.den = D;
  for (const auto& lv : out.levels) {
    Rat w = lv.weight / out.W;
    for (const auto& [a, m] : lv.nu.atoms) out.mu.add(a, m * w);
  }
  return out;
}

}  // namespace fractal
