#include "fractal/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "fractal/errors.hpp"
#include "fractal/pmf.hpp"
#include "fractal/rng.hpp"

namespace fractal {

using nlohmann::json;

void ExperimentReport::verdict(const std::string& key, bool pass, double value, double tol,
                               const std::string& detail) {
  verdicts.push_back({key, pass, value, tol, detail});
}

bool ExperimentReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

std::string ExperimentReport::to_json() const {
  json j;
  j["schema"] = "report-v1";
  j["name"] = name;
  j["seed"] = seed;
  if (!params_echo.empty()) {
    try {
      j["params"] = json::parse(params_echo);
    } catch (const json::exception&) {
      j["params"] = params_echo;
    }
  }
  json sc = json::object();
  for (const auto& [k, v] : scalars) sc[k] = v;
  j["scalars"] = std::move(sc);
  json se = json::object();
  for (const auto& [k, pts] : series) {
    json arr = json::array();
    for (const auto& [x, y] : pts) arr.push_back({x, y});
    se[k] = std::move(arr);
  }
  j["series"] = std::move(se);
  json vd = json::array();
  for (const auto& v : verdicts)
    vd.push_back({{"name", v.name},
                  {"pass", v.pass},
                  {"value", v.value},
                  {"tolerance", v.tolerance},
                  {"detail", v.detail}});
  j["verdicts"] = std::move(vd);
  j["all_pass"] = all_pass();
  return j.dump(2) + "\n";
}

void ExperimentReport::write_csv(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [k, pts] : series) {
    std::ofstream os(dir + "/" + name + "." + k + ".csv");
    os << "scale_index,scale,value\n";
    for (size_t i = 0; i < pts.size(); ++i)
      os << i << "," << pts[i].first << "," << pts[i].second << "\n";
  }
}

namespace {

double slope_fit(const std::vector<std::pair<double, double>>& xy) {
  // least-squares slope of log y vs log x over positive pairs
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [x, y] : xy) {
    if (x <= 0 || y <= 0) continue;
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0;
  double den = n * sxx - sx * sx;
  return den == 0 ? 0 : (n * sxy - sx * sy) / den;
}

std::vector<double> lpt_to_double(const LPt& a, const Int& den) {
  std::vector<double> x(a.size());
  double inv = 1.0 / to_double(den);
  for (size_t l = 0; l < a.size(); ++l) x[l] = to_double(a[l]) * inv;
  return x;
}

/// Exact interval-mass oracle for one-dimensional measures.
struct D1Oracle {
  std::vector<Rat> coords;
  std::vector<Rat> prefix;  // prefix[i] = mass of first i atoms

  explicit D1Oracle(const DiscreteMeasure& mu) {
    std::vector<std::pair<Rat, Rat>> pts;
    for (const auto& [a, m] : mu.atoms) pts.push_back({Rat(a[0], mu.den), m});
    std::sort(pts.begin(), pts.end());
    prefix.push_back(Rat(0));
    for (const auto& [x, m] : pts) {
      coords.push_back(x);
      prefix.push_back(prefix.back() + m);
    }
  }

  /// mu((a, b)) for the open interval a < b.
  Rat open_interval(const Rat& a, const Rat& b) const {
    size_t i = std::upper_bound(coords.begin(), coords.end(), a) - coords.begin();
    size_t j = std::lower_bound(coords.begin(), coords.end(), b) - coords.begin();
    return j > i ? Rat(prefix[j] - prefix[i]) : Rat(0);
  }
};

struct NongeoBoxSample {
  std::vector<std::vector<double>> xi;
  double measured_edge = 0;  // total structured window length per coordinate
};

NongeoBoxSample nongeo_box_sample(const NongeoLevel& lv, double c, int d, SplitRng rng,
                                  int count) {
  NongeoBoxSample out;
  double box_edge = c * std::pow(2.0, 2 * lv.n);
  double step = std::pow(2.0, lv.n) * double(lv.rho);
  long long kmax = static_cast<long long>(std::floor(box_edge / step));
  double halfwin = std::pow(2.0, lv.n - 2);
  out.measured_edge = double(2 * kmax + 1) * 2 * halfwin;
  for (int s = 0; s < count; ++s) {
    std::vector<double> xi(d);
    for (int l = 0; l < d; ++l) {
      long long k = static_cast<long long>(rng.uniform_int(2 * kmax + 1)) - kmax;
      double off = (2 * rng.uniform_real() - 1) * halfwin;
      xi[l] = double(k) * step + off;
      if (std::abs(xi[l]) > box_edge) xi[l] = std::copysign(box_edge, xi[l]);
    }
    out.xi.push_back(std::move(xi));
  }
  return out;
}

}  // namespace

BallSchedule default_ball_schedule(const MeasureFamily& fam, int n_centers, std::uint64_t seed) {
  if (fam.levels.empty()) throw EmptySchedule();
  BallSchedule out;
  const DiscreteMeasure& mu = fam.levels.back();
  std::vector<const LPt*> atoms;
  for (const auto& [a, m] : mu.atoms) atoms.push_back(&a);
  SplitRng rng(seed);
  for (int i = 0; i < n_centers; ++i) {
    const LPt& a = *atoms[rng.uniform_int(atoms.size())];
    std::vector<Rat> x(a.size());
    for (size_t l = 0; l < a.size(); ++l) x[l] = Rat(a[l], mu.den);
    out.centers.push_back(std::move(x));
  }
  for (int k = 1; k <= fam.sc.depth(); ++k) out.radii.push_back(Rat(1, fam.sc.MM[k]));
  return out;
}

ExperimentReport frostman_fit(const MeasureFamily& fam, const Rat& target,
                              const BallSchedule& sched, const Rat& declared) {
  if (fam.levels.empty() || sched.centers.empty() || sched.radii.empty()) throw EmptySchedule();
  ExperimentReport rep;
  rep.name = "frostman_fit";
  const DiscreteMeasure& mu = fam.levels.back();
  bool exact_ok = true;
  double c_sup = 0;
  std::string worst;
  std::vector<std::pair<double, double>> sup_by_rho;
  for (const auto& rho : sched.radii) {
    Rat max_mass(0);
    for (const auto& x : sched.centers) {
      Rat mass = ball_mass(mu, x, rho);
      if (mass > max_mass) max_mass = mass;
      if (mass > 0 && cmp_pow(mass / declared, rho, target) > 0) {
        exact_ok = false;
        if (worst.empty()) worst = "mass " + std::to_string(to_double(mass));
      }
      double ratio = to_double(mass) / std::pow(to_double(rho), to_double(target));
      if (ratio > c_sup) c_sup = ratio;
    }
    sup_by_rho.push_back({to_double(rho), to_double(max_mass)});
  }
  rep.series["sup_ball_mass"] = sup_by_rho;
  rep.scalar("C_sup", c_sup);
  rep.scalar("C_declared", to_double(declared));
  rep.scalar("slope", slope_fit(sup_by_rho));
  rep.verdict("frostman_bound", exact_ok, c_sup, to_double(declared), worst);
  return rep;
}

ExperimentReport lower_mass_check(const MeasureFamily& fam,
                                  const std::vector<std::vector<Rat>>& points,
                                  const Rat& exponent, const std::vector<Rat>& eps_list) {
  if (fam.levels.empty() || points.empty()) throw EmptySchedule();
  ExperimentReport rep;
  rep.name = "lower_mass_check";
  const DiscreteMeasure& mu = fam.levels.back();
  int d = fam.sc.d, r = fam.sc.r;
  for (const auto& eps : eps_list) {
    double min_ratio = -1;
    for (const auto& x : points) {
      for (int k = 1; k <= fam.sc.depth(); ++k) {
        Rat rho2 = Rat(Int(r) * r * d) / Rat(fam.sc.MM[k] * fam.sc.MM[k]);
        Rat mass = ball_mass_sq(mu, x, rho2);
        if (mass == 0) throw PointOffSupport("zero mass at a scheduled point");
        double rho = to_double(Rat(r)) * std::sqrt(double(d)) / to_double(Rat(fam.sc.MM[k]));
        double ratio = to_double(mass) / std::pow(rho, to_double(exponent + eps));
        if (min_ratio < 0 || ratio < min_ratio) min_ratio = ratio;
      }
    }
    rep.series["min_ratio"].push_back({to_double(eps), min_ratio});
    rep.verdict("positive_eps_" + std::to_string(to_double(eps)), min_ratio > 0, min_ratio, 0);
  }
  return rep;
}

ExperimentReport fourier_decay_profile(const DiscreteMeasure& mu, const Rat& exponent,
                                       const XiSpec& spec, double declared_B) {
  ExperimentReport rep;
  rep.name = "fourier_decay_profile";
  rep.seed = spec.seed;
  SplitRng rng(spec.seed);
  double cap = to_double(mu.den) / 2.0;
  double expo = to_double(exponent);
  double overall = 0;
  for (int j = 0; std::pow(2.0, j) <= cap; ++j) {
    double lo = std::pow(2.0, j), hi = std::min(cap, 2 * lo);
    std::vector<double> vals;
    for (int s = 0; s < spec.per_annulus; ++s) {
      double radius = lo + (hi - lo) * rng.uniform_real();
      std::vector<double> xi(mu.d);
      double norm2 = 0;
      for (int l = 0; l < mu.d; ++l) {
        // gaussian direction via Box-Muller
        double u1 = std::max(rng.uniform_real(), 1e-300), u2 = rng.uniform_real();
        xi[l] = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
        norm2 += xi[l] * xi[l];
      }
      double nrm = std::sqrt(std::max(norm2, 1e-300));
      for (int l = 0; l < mu.d; ++l) xi[l] *= radius / nrm;
      vals.push_back(std::pow(radius, expo) * std::abs(fourier_eval(mu, xi)));
    }
    std::sort(vals.begin(), vals.end());
    double mx = vals.back();
    double med = vals[vals.size() / 2];
    rep.series["annulus_max"].push_back({lo, mx});
    rep.series["annulus_median"].push_back({lo, med});
    overall = std::max(overall, mx);
  }
  rep.scalar("max_weighted", overall);
  rep.scalar("slope_median", slope_fit(rep.series["annulus_median"]));
  rep.verdict("decay_bound", overall <= declared_B, overall, declared_B);
  return rep;
}

std::vector<double> increment_sup(const MeasureFamily& fam, const Rat& exponent,
                                  long long net_cap) {
  if (fam.levels.size() < 1) throw EmptySchedule();
  int d = fam.sc.d, r = fam.sc.r;
  std::vector<double> out;
  DiscreteMeasure root = dirac_zero(d, 0, 1);
  for (int n = 1; n <= fam.sc.depth(); ++n) {
    const DiscreteMeasure& mu_n = fam.levels[n - 1];
    const DiscreteMeasure& mu_prev = n == 1 ? root : fam.levels[n - 2];
    double MM = to_double(fam.sc.MM[n]);
    double weight = std::pow(MM, to_double(exponent));
    // exact spacing c_{r,d} MM^(-alpha/2) with alpha = 2 * exponent
    double exact_count = std::ceil(MM * 16.0 * (r + 1) * d / std::pow(MM, -to_double(exponent)));
    long long count = static_cast<long long>(std::min<double>(net_cap, exact_count));
    count = std::max<long long>(count, 2);
    if (d > 1)
      count = std::min(count, static_cast<long long>(std::pow(2e6, 1.0 / d)));
    double sup = 0;
    std::vector<long long> idx(d, 0);
    std::vector<double> xi(d);
    while (true) {
      for (int l = 0; l < d; ++l) xi[l] = MM * double(idx[l]) / double(count);
      sup = std::max(sup, weight * std::abs(increment_D(mu_n, mu_prev, fam.sc, n, xi)));
      int l = d - 1;
      for (; l >= 0; --l) {
        if (++idx[l] < count) break;
        idx[l] = 0;
      }
      if (l < 0) break;
    }
    out.push_back(sup);
  }
  return out;
}

ExperimentReport increment_concentration(const std::vector<MeasureFamily>& replicas,
                                         const Rat& exponent, long long net_cap, double B,
                                         double slack) {
  if (replicas.empty()) throw EmptySchedule();
  ExperimentReport rep;
  rep.name = "increment_concentration";
  int depth = replicas.front().sc.depth();
  int d = replicas.front().sc.d, r = replicas.front().sc.r;
  std::vector<std::vector<double>> sups;
  for (const auto& fam : replicas) sups.push_back(increment_sup(fam, exponent, net_cap));
  for (int n = 1; n <= depth; ++n) {
    const MeasureFamily& fam = replicas.front();
    double MM = to_double(fam.sc.MM[n]);
    double exact_count = std::ceil(MM * 16.0 * (r + 1) * d / std::pow(MM, -to_double(exponent)));
    long long count = std::max<long long>(2, static_cast<long long>(std::min<double>(net_cap, exact_count)));
    double net_total = std::pow(double(count), d);
    double Tprod = 1;
    if (!fam.profile.empty())
      for (int k = 1; k <= n; ++k) Tprod *= to_double(fam.profile[k - 1]);
    double alpha = 2 * to_double(exponent);
    double envelope = 4.0 * net_total * std::exp(-B * B * Tprod * std::pow(MM, -alpha) / 16.0);
    int exceed = 0;
    double max_sup = 0;
    for (const auto& s : sups) {
      if (s[n - 1] > B) ++exceed;
      max_sup = std::max(max_sup, s[n - 1]);
    }
    double freq = double(exceed) / double(sups.size());
    rep.series["exceedance"].push_back({double(n), freq});
    rep.series["envelope"].push_back({double(n), envelope});
    rep.series["max_sup"].push_back({double(n), max_sup});
    rep.verdict("hoeffding_level_" + std::to_string(n), freq <= envelope + slack, freq,
                envelope + slack);
  }
  rep.scalar("B", B);
  rep.scalar("replicas", double(replicas.size()));
  return rep;
}

ExperimentReport sparsity_certificate(const OffspringAssignment& a,
                                      const std::vector<BlockPartition>& kinds) {
  ExperimentReport rep;
  rep.name = "sparsity_certificate";
  long long checked = 0;
  bool ok = true;
  std::string witness;
  for (const auto& [w, kids] : a.children) {
    size_t level = w.size();
    if (level >= kinds.size()) continue;
    std::vector<Pt> S;
    for (const auto& [u, m] : kids) S.push_back(u);
    ++checked;
    if (!is_block_sparse(S, kinds[level]) && ok) {
      ok = false;
      witness = "node at depth " + std::to_string(level);
    }
  }
  rep.scalar("nodes_checked", double(checked));
  rep.verdict("all_sparse", ok, ok ? 1 : 0, 0, witness);
  return rep;
}

BohrPointSet bohr_points(const RestrictionGeoBundle& b, int n, const Rat& c, const Rat& theta,
                         std::size_t max_points) {
  if (n < 1 || n > static_cast<int>(b.param.size())) throw ValidationError("level out of range");
  const ScaleSequence& sc = b.sc;
  Rat box = c * rat_pow(theta, n) * Rat(sc.MM[n]);
  int m = 0;
  for (int k = 1; k <= n; ++k)
    if (Rat(4 * sc.MM[k]) <= box) m = k;
  if (m == 0) throw EmptyBohrSet("4 MM_1 > c theta^n MM_n");

  std::vector<Int> vals{Int(0)};
  for (int k = 1; k <= m; ++k) {
    const ResGeoLevel& lv = b.param[k - 1];
    std::vector<Int> next;
    next.reserve(vals.size() * static_cast<size_t>(lv.Qb));
    for (const auto& v : vals)
      for (Coord a = 0; a < lv.Qb; ++a) next.push_back(v + lv.L * a);
    vals = std::move(next);
  }
  std::sort(vals.begin(), vals.end());
  std::vector<Int> kept;
  for (const auto& v : vals)
    if (Rat(v) <= box) kept.push_back(v);
  if (kept.empty()) throw EmptyBohrSet("no points inside the box");

  // Certification against the Dirichlet distance conditions at every k <= n.
  auto certified = [&](const Int& v) {
    for (int k = 1; k <= n; ++k) {
      const ResGeoLevel& lv = b.param[k - 1];
      Int rm = v % lv.L;
      if (rm < 0) rm += lv.L;
      Int dist = std::min(rm, Int(lv.L - rm));
      if (!(2 * Int(lv.Mb) * lv.Mt * dist < lv.L)) return false;
    }
    return true;
  };
  std::vector<Int> cert;
  for (const auto& v : kept)
    if (certified(v)) cert.push_back(v);
  if (cert.empty()) throw EmptyBohrSet("certification removed every point");

  BohrPointSet out;
  out.m = m;
  double min_sep = -1;
  for (size_t i = 1; i < cert.size(); ++i) {
    double gap = to_double(Int(cert[i] - cert[i - 1]));
    if (min_sep < 0 || gap < min_sep) min_sep = gap;
  }
  out.min_separation = cert.size() > 1 ? min_sep : to_double(Rat(b.A));
  out.volume_lower = rat_pow(Rat(b.A) / 4, sc.d);
  for (int k = 1; k <= m; ++k) out.volume_lower *= rat_pow(Rat(b.param[k - 1].Qb), sc.d);

  std::vector<size_t> idx(sc.d, 0);
  while (out.points.size() < max_points) {
    LPt p(sc.d);
    for (int l = 0; l < sc.d; ++l) p[l] = cert[idx[l]];
    out.points.push_back(std::move(p));
    int l = sc.d - 1;
    for (; l >= 0; --l) {
      if (++idx[l] < cert.size()) break;
      idx[l] = 0;
    }
    if (l < 0) break;
  }
  return out;
}

ExperimentReport resonance_check(const RestrictionGeoBundle& b, int n,
                                 const std::vector<LPt>& xi_list) {
  if (n < 1 || n > static_cast<int>(b.param.size())) throw ValidationError("level out of range");
  ExperimentReport rep;
  rep.name = "resonance_check";
  DiscreteMeasure conv = convolve(b.grid.levels[n - 1], b.eta[n - 1]);
  Rat bound(1, int_pow(2, static_cast<unsigned long>(b.sc.d * n)));
  for (int k = 1; k <= n; ++k)
    bound *= rat_pow(Rat(b.param[k - 1].Mb), b.sc.d) / Rat(b.param[k - 1].T);
  double bound_d = to_double(bound);
  double max_rel = 0, min_ratio = -1;
  for (const auto& xi : xi_list) {
    std::complex<double> closed(1.0, 0.0);
    for (int k = 1; k <= n; ++k) {
      const ResGeoLevel& lv = b.param[k - 1];
      closed *= to_double(rat_pow(Rat(lv.Mb), b.sc.d) / Rat(lv.T));
      double L = to_double(lv.L);
      long long N = static_cast<long long>(lv.Mb) * lv.Mt;
      for (int l = 0; l < b.sc.d; ++l) closed *= dirichlet(N, to_double(xi[l]) / L);
    }
    std::complex<double> direct = fourier_eval(conv, lpt_to_double(xi, Int(1)));
    double rel = std::abs(closed - direct) / std::max(std::abs(closed), 1e-300);
    max_rel = std::max(max_rel, rel);
    double ratio = std::abs(closed) / bound_d;
    if (min_ratio < 0 || ratio < min_ratio) min_ratio = ratio;
  }
  rep.scalar("bound", bound_d);
  rep.scalar("points", double(xi_list.size()));
  rep.verdict("closed_vs_direct", max_rel <= 1e-9, max_rel, 1e-9);
  rep.verdict("resonance_lower", min_ratio >= 1.0 - 1e-12, min_ratio, 1.0);
  return rep;
}

ExperimentReport wn_vn_energy(const RestrictionGeoBundle& b, int n, const Rat& c,
                              long long grid_points) {
  if (n < 1 || n > static_cast<int>(b.param.size())) throw ValidationError("level out of range");
  ExperimentReport rep;
  rep.name = "wn_vn_energy";
  const DiscreteMeasure& mut = b.grid.levels[n - 1];
  int d = b.sc.d;
  double MM = to_double(b.sc.MM[n]);
  double half = 2 * to_double(c) * MM;

  long long per = std::max<long long>(2, llround(std::pow(double(grid_points), 1.0 / d)));
  double h = 2 * half / double(per);
  bool pointwise_ok = true;
  double int_w = 0, int_v = 0;
  std::vector<long long> idx(d, 0);
  std::vector<double> xi(d);
  while (true) {
    double phi = 1;
    for (int l = 0; l < d; ++l) {
      xi[l] = -half + h * (double(idx[l]) + 0.5);
      phi *= std::max(0.0, 1.0 - std::abs(xi[l]) / half);
    }
    double a2 = std::norm(fourier_eval(mut, xi));
    double W = phi * a2, V = phi * a2 * a2;
    if (!(V >= -1e-12 && V <= W + 1e-12 && W <= 1 + 1e-12)) pointwise_ok = false;
    int_w += W;
    int_v += V;
    int l = d - 1;
    for (; l >= 0; --l) {
      if (++idx[l] < per) break;
      idx[l] = 0;
    }
    if (l < 0) break;
  }
  double hd = std::pow(h, d);
  rep.scalar("int_W", int_w * hd);
  rep.scalar("int_V", int_v * hd);
  rep.verdict("pointwise_bounds", pointwise_ok, pointwise_ok ? 1 : 0, 1e-12);

  // Exact identities.
  std::vector<LPt> E;
  for (const auto& [a, m] : mut.atoms) E.push_back(a);
  Rat lhs = l2_period_integral(mut);
  Rat rhs = rat_pow(Rat(mut.den), d) / Rat(Int(E.size()));
  rep.scalar("parseval_l2", to_double(lhs));
  rep.verdict("parseval_exact", lhs == rhs, to_double(lhs), 0);
  std::vector<LPt> diff = difference_set(E);
  Rat l4 = l4_period_integral(mut);
  Rat auto2 = l4 / rat_pow(Rat(mut.den), d);
  Rat floor = Rat(1, Int(diff.size()));
  rep.scalar("autocorr_l2", to_double(auto2));
  rep.scalar("cs_floor", to_double(floor));
  rep.verdict("cauchy_schwarz_floor", auto2 >= floor, to_double(auto2), to_double(floor));
  return rep;
}

std::vector<HalfPlane> region_halfplanes(const ExponentRegion& reg, RegionKind kind) {
  Rat al = reg.alpha, be = reg.beta, d(reg.d);
  std::vector<HalfPlane> hp;
  switch (kind) {
    case RegionKind::Delta:
      hp.push_back({Rat(-1), Rat(1), Rat(0)});                     // q >= p
      hp.push_back({d - al + be, -(d - al), be});                  // first necessary line
      hp.push_back({d - al, -(d - al + be), Rat(0)});              // its dual
      break;
    case RegionKind::Trap:
      hp.push_back({Rat(-1), Rat(1), Rat(0)});
      hp.push_back({d - be, -d, Rat(0)});
      hp.push_back({Rat(1), Rat(-1), be / (2 * d)});
      hp.push_back({d, -(d - be), be});
      break;
    case RegionKind::Pent: {
      ExponentRegion bb{be, be, reg.d};
      hp = region_halfplanes(bb, RegionKind::Delta);
      hp.push_back({d, -(d - 2 * al + be), al});
      hp.push_back({d - 2 * al + be, -d, be - al});
      break;
    }
  }
  return hp;
}

bool region_membership(const ExponentRegion& reg, RegionKind kind, const Rat& a, const Rat& b) {
  for (const auto& h : region_halfplanes(reg, kind))
    if (h.A * a + h.B * b > h.C) return false;
  return true;
}

std::vector<std::pair<Rat, Rat>> region_vertices(const ExponentRegion& reg, RegionKind kind) {
  std::vector<HalfPlane> hp = region_halfplanes(reg, kind);
  std::vector<std::pair<Rat, Rat>> verts;
  for (size_t i = 0; i < hp.size(); ++i)
    for (size_t j = i + 1; j < hp.size(); ++j) {
      Rat det = hp[i].A * hp[j].B - hp[j].A * hp[i].B;
      if (det == 0) continue;
      Rat a = (hp[i].C * hp[j].B - hp[j].C * hp[i].B) / det;
      Rat b = (hp[i].A * hp[j].C - hp[j].A * hp[i].C) / det;
      bool inside = true;
      for (const auto& h : hp)
        if (h.A * a + h.B * b > h.C) {
          inside = false;
          break;
        }
      if (inside) verts.push_back({a, b});
    }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  if (verts.size() > 2) {
    // counterclockwise order around the centroid
    Rat ca(0), cb(0);
    for (const auto& [a, b] : verts) {
      ca += a;
      cb += b;
    }
    ca /= Int(verts.size());
    cb /= Int(verts.size());
    std::sort(verts.begin(), verts.end(),
              [&](const std::pair<Rat, Rat>& u, const std::pair<Rat, Rat>& v) {
                double au = std::atan2(to_double(u.second - cb), to_double(u.first - ca));
                double av = std::atan2(to_double(v.second - cb), to_double(v.first - ca));
                return au < av;
              });
  }
  return verts;
}

bool hull_membership(const std::vector<std::pair<Rat, Rat>>& verts, const Rat& a, const Rat& b) {
  if (verts.empty()) return false;
  if (verts.size() == 1) return verts[0].first == a && verts[0].second == b;
  if (verts.size() == 2) {
    const auto& [x1, y1] = verts[0];
    const auto& [x2, y2] = verts[1];
    Rat cross = (x2 - x1) * (b - y1) - (y2 - y1) * (a - x1);
    if (cross != 0) return false;
    Rat dot = (a - x1) * (x2 - x1) + (b - y1) * (y2 - y1);
    Rat len2 = (x2 - x1) * (x2 - x1) + (y2 - y1) * (y2 - y1);
    return dot >= 0 && dot <= len2;
  }
  for (size_t i = 0; i < verts.size(); ++i) {
    const auto& [x1, y1] = verts[i];
    const auto& [x2, y2] = verts[(i + 1) % verts.size()];
    Rat cross = (x2 - x1) * (b - y1) - (y2 - y1) * (a - x1);
    if (cross < 0) return false;
  }
  return true;
}

std::pair<Rat, Rat> critical_vertex(const ExponentRegion& reg) {
  Rat g = Rat(reg.d) - reg.alpha;
  Rat den = 2 * g + reg.beta;
  return {(g + reg.beta) / den, g / den};
}

Rat q_star(const ExponentRegion& reg) {
  if (reg.beta == 0) throw ValidationError("beta must be positive");
  return (4 * Rat(reg.d) - 4 * reg.alpha + 2 * reg.beta) / reg.beta;
}

namespace {

double indicator_norm(double volume, const Rat& inv_p) {
  // ||1_A||_p = vol(A)^(1/p); 1/p = 0 means the sup norm.
  if (inv_p == 0) return volume > 0 ? 1.0 : 0.0;
  return std::pow(volume, to_double(inv_p));
}

double lq_from_inv(const Rat& inv_q) {
  return inv_q == 0 ? std::numeric_limits<double>::infinity() : 1.0 / to_double(inv_q);
}

/// Exact L^q norm of the step function sum_i w_i 1_[lo_i, hi_i) on the line.
/// Positions are in lattice units over `den`; inv_q = 0 gives the sup norm.
double step_lq_norm(std::vector<std::pair<Rat, double>>& events, const Rat& inv_q) {
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double qv = inv_q == 0 ? 0 : 1.0 / to_double(inv_q);
  double val = 0, acc = 0, maxv = 0;
  for (size_t i = 0; i < events.size();) {
    Rat pos = events[i].first;
    while (i < events.size() && events[i].first == pos) val += events[i++].second;
    maxv = std::max(maxv, val);
    if (i < events.size() && val > 0)
      acc += to_double(Rat(events[i].first - pos)) * std::pow(val, qv);
  }
  return inv_q == 0 ? maxv : std::pow(acc, 1.0 / qv);
}

void trend_verdicts(ExperimentReport& rep, const std::vector<double>& ratios, bool inside) {
  bool strictly_up = true, bounded = true;
  for (size_t i = 1; i < ratios.size(); ++i) {
    if (!(ratios[i] > ratios[i - 1])) strictly_up = false;
    if (ratios[i] > ratios[i - 1] * 1.05) bounded = false;
  }
  if (inside)
    rep.verdict("interior_bounded", bounded, bounded ? 1 : 0, 0.05);
  else
    rep.verdict("exterior_increasing", strictly_up, strictly_up ? 1 : 0, 0);
}

}  // namespace

ExperimentReport conv_sharpness_geometric(const FactorizedMeasure& fm, const Rat& alpha,
                                          const Rat& beta, const Rat& ia, const Rat& ib,
                                          const std::vector<Int>& delta_nums,
                                          long long grid_points) {
  if (delta_nums.size() < 2) throw EmptySchedule();
  ExperimentReport rep;
  rep.name = "conv_sharpness_geometric";
  const DiscreteMeasure& mu = fm.combined.levels.back();
  const DiscreteMeasure& mut = fm.grid.levels.back();
  int d = mu.d;
  Int den = mu.den;
  std::vector<LPt> E;
  for (const auto& [a, m] : mut.atoms) E.push_back(a);
  std::vector<LPt> diff = difference_set(E);
  ExponentRegion reg{alpha, beta, d};
  bool inside = region_membership(reg, RegionKind::Delta, ia, ib);
  rep.scalar("inside_region", inside ? 1 : 0);

  std::vector<double> ratios;
  for (const auto& m : delta_nums) {
    if (m < 1) throw NonLatticeDelta("delta numerator must be >= 1");
    // cells of the 2delta sup-norm neighborhood of the difference set
    std::set<LPt> cells;
    Int side = 4 * m;
    for (const auto& u : diff) {
      LPt off(d, 0);
      while (true) {
        LPt cc(d);
        for (int l = 0; l < d; ++l) cc[l] = u[l] - 2 * m + off[l];
        cells.insert(std::move(cc));
        int l = d - 1;
        for (; l >= 0; --l) {
          if (++off[l] < side) break;
          off[l] = 0;
        }
        if (l < 0) break;
        if (cells.size() > 4'000'000) throw ValidationError("delta neighborhood too large");
      }
    }
    double volA = double(cells.size()) * std::pow(to_double(den), -d);
    double norm_f = indicator_norm(volA, ia);

    double norm_conv;
    if (d == 1) {
      // mu * f is a step function; merge the cells into maximal runs and
      // integrate |.|^q exactly over the breakpoint sweep
      std::vector<std::pair<Int, Int>> runs;
      Int start, prev;
      bool open = false;
      for (const auto& cc : cells) {
        if (!open) {
          start = prev = cc[0];
          open = true;
        } else if (cc[0] == prev + 1) {
          prev = cc[0];
        } else {
          runs.push_back({start, prev + 1});
          start = prev = cc[0];
        }
      }
      if (open) runs.push_back({start, prev + 1});
      std::vector<std::pair<Rat, double>> events;
      events.reserve(mu.atoms.size() * runs.size() * 2);
      for (const auto& [a, mm] : mu.atoms)
        for (const auto& [rlo, rhi] : runs) {
          events.push_back({Rat(a[0] + rlo, den), to_double(mm)});
          events.push_back({Rat(a[0] + rhi, den), -to_double(mm)});
        }
      norm_conv = step_lq_norm(events, ib);
    } else {
      // quadrature grid over the support of mu * f: atoms plus cell extents
      std::vector<double> alo(d, 1e300), ahi(d, -1e300), clo(d, 1e300), chi(d, -1e300);
      double inv_den = 1.0 / to_double(den);
      for (const auto& [a, mm] : mu.atoms)
        for (int l = 0; l < d; ++l) {
          double x = to_double(a[l]) * inv_den;
          alo[l] = std::min(alo[l], x);
          ahi[l] = std::max(ahi[l], x);
        }
      for (const auto& cc : cells)
        for (int l = 0; l < d; ++l) {
          double x = to_double(cc[l]) * inv_den;
          clo[l] = std::min(clo[l], x);
          chi[l] = std::max(chi[l], x + inv_den);
        }
      GridSpec grid;
      long long per = std::max<long long>(2, llround(std::pow(double(grid_points), 1.0 / d)));
      for (int l = 0; l < d; ++l) {
        double a = alo[l] + clo[l], bnd = ahi[l] + chi[l];
        grid.lo.push_back(a);
        grid.npts.push_back(per);
        grid.h = (bnd - a) / double(per);
      }
      std::vector<double> vals = measure_conv_indicator(mu, cells, grid);
      norm_conv = grid_lp_norm(grid, vals, lq_from_inv(ib));
    }
    double ratio = norm_conv / std::max(norm_f, 1e-300);
    rep.series["ratio"].push_back({to_double(m) / to_double(den), ratio});
    ratios.push_back(ratio);
  }
  trend_verdicts(rep, ratios, inside);
  return rep;
}

ExperimentReport conv_sharpness_nongeometric(const HeavyCoreMeasure& hc, const Rat& alpha,
                                             const Rat& beta, const Rat& ia, const Rat& ib,
                                             const std::vector<Rat>& deltas,
                                             long long grid_points) {
  if (deltas.size() < 2) throw EmptySchedule();
  ExperimentReport rep;
  rep.name = "conv_sharpness_nongeometric";
  const DiscreteMeasure& mu = hc.fam.levels.back();
  int d = mu.d;
  ExponentRegion reg{alpha, beta, d};
  bool inside = region_membership(reg, RegionKind::Pent, ia, ib);
  rep.scalar("inside_region", inside ? 1 : 0);
  double vd = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);

  D1Oracle* oracle = nullptr;
  D1Oracle o1 = D1Oracle(mu);
  if (d == 1) oracle = &o1;

  std::vector<double> ratios;
  for (const auto& delta : deltas) {
    if (delta <= 0) throw NonLatticeDelta("delta must be positive");
    double norm_f = indicator_norm(vd * std::pow(2 * to_double(delta), d), ia);
    Rat two_delta = 2 * delta;
    double norm_conv;
    if (d == 1) {
      // (mu * f)(x) = mu((x - 2 delta, x + 2 delta)) is a step function with
      // breakpoints at atom +- 2 delta; integrate |.|^q exactly
      std::vector<std::pair<Rat, double>> events;
      events.reserve(mu.atoms.size() * 2);
      for (const auto& [a, mm] : mu.atoms) {
        Rat x(a[0], mu.den);
        events.push_back({x - two_delta, to_double(mm)});
        events.push_back({x + two_delta, -to_double(mm)});
      }
      norm_conv = step_lq_norm(events, ib);
    } else {
      std::vector<double> lo(d, 1e300), hi(d, -1e300);
      for (const auto& [a, mm] : mu.atoms)
        for (int l = 0; l < d; ++l) {
          double x = to_double(a[l]) / to_double(mu.den);
          lo[l] = std::min(lo[l], x);
          hi[l] = std::max(hi[l], x);
        }
      long long per = std::max<long long>(2, llround(std::pow(double(grid_points), 1.0 / d)));
      GridSpec grid;
      double pad = 2 * to_double(delta);
      for (int l = 0; l < d; ++l) {
        grid.lo.push_back(lo[l] - pad);
        grid.npts.push_back(per);
        grid.h = (hi[l] - lo[l] + 2 * pad) / double(per);
      }
      std::vector<double> vals(grid.size());
      for (size_t i = 0; i < vals.size(); ++i) {
        std::vector<double> x = grid.point(i);
        std::vector<Rat> xr(d);
        for (int l = 0; l < d; ++l) xr[l] = parse_rational(std::to_string(x[l]));
        vals[i] = to_double(ball_mass_sq(mu, xr, two_delta * two_delta));
      }
      norm_conv = grid_lp_norm(grid, vals, lq_from_inv(ib));
    }
    double ratio = norm_conv / std::max(norm_f, 1e-300);
    rep.series["ratio"].push_back({to_double(delta), ratio});
    ratios.push_back(ratio);
  }

  // Core floor at the finest delta: mu(B(x, 2 delta)) at realized core points.
  if (!hc.cores.empty() && !hc.cores.back().leaves.empty()) {
    const Rat& delta = deltas.back();
    Rat two_delta = 2 * delta;
    double floor = -1;
    const ScaleSequence& sc = hc.fam.sc;
    for (const auto& [w, mass] : hc.cores.back().leaves) {
      CodingPoint cp = coding_point(sc, w, sc.r);
      double v;
      if (d == 1)
        v = to_double(o1.open_interval(cp.x[0] - two_delta, cp.x[0] + two_delta));
      else
        v = to_double(ball_mass_sq(mu, cp.x, two_delta * two_delta));
      if (floor < 0 || v < floor) floor = v;
    }
    rep.scalar("core_floor", floor);
    rep.verdict("core_floor_positive", floor > 0, floor, 0);
  }
  trend_verdicts(rep, ratios, inside);
  return rep;
}

ExperimentReport heavy_core_certificate(const HeavyCoreMeasure& hc, const Rat& alpha) {
  ExperimentReport rep;
  rep.name = "heavy_core_certificate";
  const ScaleSequence& sc = hc.fam.sc;
  int d = sc.d, r = sc.r;

  // Core-ball lower bound at every realized core point, every level.
  bool core_ok = true;
  long long core_points = 0;
  std::string core_witness;
  for (int n = 1; n <= sc.depth(); ++n) {
    if (n > static_cast<int>(hc.cores.size())) break;
    const DiscreteMeasure& mu = hc.fam.levels[n - 1];
    Rat rho2 = Rat(Int(r) * r * d) / Rat(sc.MM[n] * sc.MM[n]);
    Rat cn = rat_pow(hc.c, n);
    for (const auto& [w, mass] : hc.cores[n - 1].leaves) {
      CodingPoint cp = coding_point(sc, w, r);
      Rat ball = ball_mass_sq(mu, cp.x, rho2);
      ++core_points;
      if (cmp_pow(ball / cn, Rat(sc.MM[n]), -alpha) < 0) {
        core_ok = false;
        if (core_witness.empty()) core_witness = "level " + std::to_string(n);
      }
    }
  }
  rep.scalar("core_points", double(core_points));
  rep.verdict("core_ball_lower", core_ok && core_points > 0, core_ok ? 1 : 0, 0, core_witness);

  // Cylinder upper bound tau([w]) <= r^-d|w| MM_|w|^-alpha at every node.
  std::map<Word, Rat> node_mass;
  node_mass[Word{}] = Rat(1);
  std::vector<std::pair<const Word*, const std::map<Pt, Rat>*>> order;
  for (const auto& [w, kids] : hc.fam.assignment.children) order.push_back({&w, &kids});
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first->size() < b.first->size(); });
  bool tau_ok = true;
  long long nodes = 0;
  std::string tau_witness;
  for (const auto& [wp, kidsp] : order) {
    auto it = node_mass.find(*wp);
    if (it == node_mass.end()) continue;
    Rat parent = it->second;
    int depth_child = static_cast<int>(wp->size()) + 1;
    Int rd = int_pow(Int(r), static_cast<unsigned long>(d) * depth_child);
    for (const auto& [u, em] : *kidsp) {
      Rat child = parent * em;
      Word cw = *wp;
      cw.push_back(u);
      node_mass[cw] = child;
      ++nodes;
      if (cmp_pow(child * rd, Rat(sc.MM[depth_child]), -alpha) > 0) {
        tau_ok = false;
        if (tau_witness.empty()) tau_witness = "node at depth " + std::to_string(depth_child);
      }
    }
  }
  rep.scalar("nodes_checked", double(nodes));
  rep.verdict("cylinder_upper", tau_ok, tau_ok ? 1 : 0, 0, tau_witness);
  return rep;
}

ExperimentReport factorization_certificate(const FactorizedMeasure& fm) {
  ExperimentReport rep;
  rep.name = "factorization_certificate";
  int depth = fm.sc.depth();
  int d = fm.sc.d;

  bool conv_ok = true;
  std::string conv_witness;
  for (int n = 1; n <= depth; ++n) {
    DiscreteMeasure conv = convolve(fm.grid.levels[n - 1], fm.random.levels[n - 1]);
    if (!(conv.atoms == fm.combined.levels[n - 1].atoms &&
          conv.total == fm.combined.levels[n - 1].total)) {
      conv_ok = false;
      if (conv_witness.empty()) conv_witness = "level " + std::to_string(n);
    }
  }
  rep.verdict("convolution_identity", conv_ok, conv_ok ? 1 : 0, 0, conv_witness);

  std::vector<BlockPartition> mod_kinds, plain_kinds, q_kinds;
  for (int n = 1; n <= depth; ++n) {
    mod_kinds.push_back(BlockPartition::modular(fm.param[n - 1].q, fm.param[n - 1].Q));
    plain_kinds.push_back(BlockPartition::plain(fm.param[n - 1].b));
    q_kinds.push_back(BlockPartition::plain(fm.param[n - 1].q));
  }
  // kinds[m] applies to offspring of depth-m nodes, i.e. level-(m+1) digits.
  // The random factor is doubly sparse; the combined digit sets, which mix
  // whole grid periods, are sparse in the plain q-blocks.
  ExperimentReport rnd_mod = sparsity_certificate(fm.random.assignment, mod_kinds);
  ExperimentReport rnd_plain = sparsity_certificate(fm.random.assignment, plain_kinds);
  ExperimentReport cmb_q = sparsity_certificate(fm.combined.assignment, q_kinds);
  rep.verdict("random_modular_sparse", rnd_mod.all_pass(), rnd_mod.all_pass() ? 1 : 0, 0);
  rep.verdict("random_plain_sparse", rnd_plain.all_pass(), rnd_plain.all_pass() ? 1 : 0, 0);
  rep.verdict("combined_q_block_sparse", cmb_q.all_pass(), cmb_q.all_pass() ? 1 : 0, 0);

  bool diff_ok = true;
  std::string diff_witness;
  Int bound(1);
  for (int n = 1; n <= depth; ++n) {
    bound *= int_pow(Int(2 * fm.param[n - 1].Mt), static_cast<unsigned long>(d));
    std::vector<LPt> E;
    for (const auto& [a, m] : fm.grid.levels[n - 1].atoms) E.push_back(a);
    std::vector<LPt> diff = difference_set(E);
    if (Int(diff.size()) > bound) {
      diff_ok = false;
      if (diff_witness.empty()) diff_witness = "level " + std::to_string(n);
    }
    rep.series["diff_cardinality"].push_back({double(n), double(diff.size())});
  }
  rep.verdict("difference_set_bound", diff_ok, diff_ok ? 1 : 0, 0, diff_witness);
  return rep;
}

ExperimentReport nongeo_resonance_certificate(const RestrictionNongeoFamily& fam,
                                              int xi_per_level, std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "nongeo_resonance_certificate";
  rep.seed = seed;
  if (fam.levels.empty()) throw MissingTestData("no levels built");
  int d = fam.mu.d;
  double c = to_double(fam.c_box);
  SplitRng root(seed);
  for (const auto& lv : fam.levels) {
    NongeoBoxSample box = nongeo_box_sample(lv, c, d,
                                            root.child(static_cast<std::uint64_t>(lv.n)),
                                            xi_per_level);
    double min_abs = -1;
    for (const auto& xi : box.xi) {
      double v = std::abs(fourier_eval(lv.nu, xi));
      if (min_abs < 0 || v < min_abs) min_abs = v;
    }
    double predicted = std::pow(2.0, 2 * lv.n) / double(lv.rho);
    rep.series["box_measure_ratio"].push_back({double(lv.n), box.measured_edge / predicted});
    rep.series["min_abs_nu_hat"].push_back({double(lv.n), min_abs});
    rep.verdict("resonance_level_" + std::to_string(lv.n), min_abs > 0, min_abs, 0);
  }
  return rep;
}

ExperimentReport restriction_experiment_geo(const RestrictionGeoBundle& b, const Rat& alpha,
                                            const Rat& beta, const Rat& ia, const Rat& ib,
                                            const Rat& c, const Rat& theta) {
  ExperimentReport rep;
  rep.name = "restriction_experiment_geo";
  if (b.f_sub.empty()) throw MissingTestData("no arithmetic sub-measures");
  int N = static_cast<int>(b.f_sub.size());
  int d = b.sc.d;
  double qd = lq_from_inv(ib);

  // Exact identity at the truncation: the full arithmetic sub-measure is the
  // grid factor convolved with eta.
  {
    DiscreteMeasure conv = convolve(b.grid.levels[N - 1], b.eta[N - 1]);
    bool equal = conv.atoms == b.f_sub[N - 1].atoms && conv.total == b.f_sub[N - 1].total;
    rep.verdict("arithmetic_submeasure_exact", equal, equal ? 1 : 0, 0);
  }

  double shift_const = 0;
  std::vector<double> ratios;
  for (int n = 1; n <= N; ++n) {
    const DiscreteMeasure& f = b.f_sub[n - 1];
    double norm_p = ia == 0 ? (f.total > 0 ? 1.0 : 0.0)
                            : std::pow(to_double(f.total), to_double(ia));
    BohrPointSet bp;
    try {
      bp = bohr_points(b, n, c, theta);
    } catch (const EmptyBohrSet&) {
      rep.scalar("empty_bohr_level_" + std::to_string(n), 1);
      continue;
    }
    double cell = std::pow(to_double(Rat(b.A)) / 4, d);
    double acc = 0, qv = std::isinf(qd) ? 0 : qd;
    double max_abs = 0;
    DiscreteMeasure conv_n = convolve(b.grid.levels[n - 1], b.eta[n - 1]);
    for (const auto& xi : bp.points) {
      std::vector<double> x = lpt_to_double(xi, Int(1));
      double fv = std::abs(fourier_eval(f, x));
      max_abs = std::max(max_abs, fv);
      if (!std::isinf(qd)) acc += std::pow(fv, qv) * cell;
      double ref = std::abs(fourier_eval(conv_n, x));
      double ximax = 0;
      for (const auto& v : x) ximax = std::max(ximax, std::abs(v));
      double bound = to_double(b.tau_ar[n - 1]) * ximax / to_double(b.sc.MM[n]);
      if (bound > 0) shift_const = std::max(shift_const, std::abs(fv - ref) / bound);
    }
    double norm_q = std::isinf(qd) ? max_abs : std::pow(acc, 1.0 / qv);
    double ratio = norm_q / std::max(norm_p, 1e-300);
    rep.series["ratio"].push_back({double(n), ratio});
    ratios.push_back(ratio);
  }
  rep.scalar("shift_constant", shift_const);
  ExponentRegion reg{alpha, beta, d};
  rep.scalar("q_star", to_double(q_star(reg)));
  // increasing iff (2d - 2 alpha + beta) / q > beta / p'
  Rat lhs = (2 * Rat(d) - 2 * alpha + beta) * ib;
  Rat rhs = beta * (1 - ia);
  rep.scalar("trend_exponent", to_double(lhs - rhs));
  if (ratios.size() >= 2) trend_verdicts(rep, ratios, lhs <= rhs);
  return rep;
}

ExperimentReport restriction_experiment_nongeo(const RestrictionNongeoFamily& fam,
                                               const Rat& alpha, const Rat& beta, const Rat& ia,
                                               const Rat& ib, int xi_per_level,
                                               std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "restriction_experiment_nongeo";
  rep.seed = seed;
  if (fam.levels.empty()) throw MissingTestData("no levels built");
  int d = fam.mu.d;
  double qd = lq_from_inv(ib);
  double W = to_double(fam.W);
  SplitRng root(seed);
  std::vector<double> ratios;
  for (const auto& lv : fam.levels) {
    NongeoBoxSample box = nongeo_box_sample(lv, to_double(fam.c_box), d,
                                            root.child(static_cast<std::uint64_t>(lv.n)),
                                            xi_per_level);
    double min_abs = -1, acc = 0, max_abs = 0;
    int taken = 0;
    for (const auto& xi : box.xi) {
      double v = std::abs(fourier_eval(lv.nu, xi));
      if (min_abs < 0 || v < min_abs) min_abs = v;
      max_abs = std::max(max_abs, v);
      if (!std::isinf(qd)) acc += std::pow(to_double(lv.weight) * v, qd);
      ++taken;
    }
    double predicted = std::pow(2.0, 2 * lv.n) / double(lv.rho);
    rep.series["box_measure_ratio"].push_back({double(lv.n), box.measured_edge / predicted});
    rep.series["min_abs_nu_hat"].push_back({double(lv.n), min_abs});
    rep.verdict("resonance_level_" + std::to_string(lv.n), min_abs > 0, min_abs, 0);

    double box_vol = std::pow(box.measured_edge, d);
    double norm_q = std::isinf(qd) ? to_double(lv.weight) * max_abs
                                   : std::pow(box_vol * acc / std::max(taken, 1), 1.0 / qd);
    double frac = to_double(lv.weight) / W;
    double norm_p = ia == 0 ? W : W * std::pow(frac, to_double(ia));
    double ratio = norm_q / std::max(norm_p, 1e-300);
    rep.series["ratio"].push_back({double(lv.n), ratio});
    ratios.push_back(ratio);
  }
  ExponentRegion reg{alpha, beta, d};
  rep.scalar("q_star", to_double(q_star(reg)));
  Rat lhs = (2 * Rat(d) - 2 * alpha + beta) * ib;
  Rat rhs = beta * (1 - ia);
  rep.scalar("trend_exponent", to_double(lhs - rhs));
  if (ratios.size() >= 2) trend_verdicts(rep, ratios, lhs <= rhs);
  return rep;
}

}  // namespace fractal
