#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fractal/analysis.hpp"
#include "fractal/construct.hpp"
#include "fractal/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fractal;

namespace {

struct RunConfig {
  std::string params_path;
  std::string out_dir = "out";
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  int verbosity = 0;
};

int classify(const Error& e) {
  static const std::set<std::string> degenerate = {
      "DegenerateParameters", "LambdaTooLarge", "ScaleAlignment",  "DegenerateAlpha",
      "BelowMinimumScale",    "EmptyBohrSet",   "SubtreeNotSparse", "NotDyadic"};
  if (e.name == "ParseError") return 4;
  return degenerate.count(e.name) ? 3 : 2;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string rstr(const Rat& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string measure_text(const DiscreteMeasure& mu) {
  std::ostringstream os;
  write_measure(os, mu);
  return os.str();
}

/// Loads the parameter document. Accepts either a raw parameter object or a
/// run sidecar with the resolved parameters under "params"; CLI-level seed and
/// preset override the document.
json load_params_doc(const RunConfig& cfg) {
  json j;
  try {
    j = json::parse(read_file(cfg.params_path));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  json experiment;
  if (j.is_object() && j.contains("experiment")) experiment = j["experiment"];
  if (j.is_object() && j.contains("params") && j["params"].is_object()) j = j["params"];
  if (!j.is_object()) throw ParseError("parameter document must be a JSON object");
  if (cfg.seed_set) j["seed"] = cfg.seed;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  if (!experiment.is_null()) j["experiment"] = experiment;
  return j;
}

struct BuildOutput {
  std::map<std::string, std::string> files;  // filename -> serialized content
  json extra = json::object();
};

void emit_family(BuildOutput& out, const std::string& tag, const MeasureFamily& fam) {
  for (size_t n = 0; n < fam.levels.size(); ++n)
    out.files[tag + ".L" + std::to_string(n + 1) + ".measure"] = measure_text(fam.levels[n]);
}

BuildOutput build_all(const ConstructionParams& p) {
  BuildOutput out;
  if (p.name == "salem") {
    SalemBuild b = build_salem(p);
    emit_family(out, "mu", b.fam);
    out.extra["frostman_constant"] = rstr(b.frost_const);
    out.extra["target_exponent"] = rstr(b.target);
  } else if (p.name == "heavy-core") {
    HeavyCoreMeasure hc = build_heavy_core(p);
    emit_family(out, "mu", hc.fam);
    out.extra["core_constant"] = rstr(hc.c);
  } else if (p.name == "geo-factorization") {
    FactorizedMeasure fm = build_geometric_factorization(p);
    emit_family(out, "grid", fm.grid);
    emit_family(out, "random", fm.random);
    emit_family(out, "combined", fm.combined);
    out.extra["dirac_shortcut"] = fm.dirac_shortcut;
  } else if (p.name == "restriction-geo") {
    RestrictionGeoBundle b = build_restriction_geometric(p);
    emit_family(out, "grid", b.grid);
    emit_family(out, "random", b.random);
    emit_family(out, "combined", b.combined);
    for (size_t n = 0; n < b.eta.size(); ++n)
      out.files["eta.L" + std::to_string(n + 1) + ".measure"] = measure_text(b.eta[n]);
    for (size_t n = 0; n < b.f_sub.size(); ++n)
      out.files["fsub.L" + std::to_string(n + 1) + ".measure"] = measure_text(b.f_sub[n]);
  } else if (p.name == "restriction-nongeo") {
    RestrictionNongeoFamily fam = build_restriction_nongeometric(p);
    emit_family(out, "sigma", fam.sigma.fam);
    for (const auto& lv : fam.levels)
      out.files["nu.L" + std::to_string(lv.n) + ".measure"] = measure_text(lv.nu);
    out.files["mu.measure"] = measure_text(fam.mu);
    out.extra["normalization"] = rstr(fam.W);
  } else {
    throw ValidationError("unknown construction: " + p.name);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

int cmd_construct(const RunConfig& cfg) {
  ConstructionParams p = params_from_json(load_params_doc(cfg).dump());
  BuildOutput out = build_all(p);
  fs::create_directories(cfg.out_dir);
  json meta;
  meta["schema"] = "run-v1";
  meta["construction"] = p.name;
  meta["seed"] = p.seed;
  meta["params"] = json::parse(params_to_json(p));
  json files = json::array();
  for (const auto& [name, content] : out.files) {
    write_text(fs::path(cfg.out_dir) / name, content);
    files.push_back(name);
  }
  meta["files"] = files;
  meta["extra"] = out.extra;
  write_text(fs::path(cfg.out_dir) / "run.json", meta.dump(2) + "\n");
  if (cfg.verbosity > 0)
    std::cerr << "wrote " << out.files.size() << " measure files to " << cfg.out_dir << "\n";
  return 0;
}

void write_report(const RunConfig& cfg, ExperimentReport& rep, const ConstructionParams& p) {
  rep.params_echo = params_to_json(p);
  rep.seed = p.seed;
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / (rep.name + ".report.json"), rep.to_json());
  rep.write_csv(cfg.out_dir);
}

int cmd_verify(const RunConfig& cfg) {
  ConstructionParams p = params_from_json(load_params_doc(cfg).dump());
  BuildOutput out = build_all(p);

  std::vector<ExperimentReport> reports;
  {
    // byte-identity of any measure files already on disk
    ExperimentReport rep;
    rep.name = "reproducibility";
    long long compared = 0, mismatched = 0;
    for (const auto& [name, content] : out.files) {
      fs::path path = fs::path(cfg.out_dir) / name;
      if (!fs::exists(path)) continue;
      ++compared;
      if (read_file(path.string()) != content) ++mismatched;
    }
    rep.scalar("files_compared", double(compared));
    rep.verdict("byte_identical", mismatched == 0, double(mismatched), 0);
    reports.push_back(std::move(rep));
  }

  if (p.name == "salem") {
    SalemBuild b = build_salem(p);
    BallSchedule sched = default_ball_schedule(b.fam, 200, p.seed + 1);
    reports.push_back(frostman_fit(b.fam, b.target, sched, b.frost_const));
    std::vector<std::vector<Rat>> pts(sched.centers.begin(),
                                      sched.centers.begin() + std::min<size_t>(50, sched.centers.size()));
    reports.push_back(lower_mass_check(b.fam, pts, b.target, {Rat(0)}));
  } else if (p.name == "heavy-core") {
    HeavyCoreMeasure hc = build_heavy_core(p);
    reports.push_back(heavy_core_certificate(hc, p.alpha));
  } else if (p.name == "geo-factorization") {
    FactorizedMeasure fm = build_geometric_factorization(p);
    reports.push_back(factorization_certificate(fm));
  } else if (p.name == "restriction-geo") {
    RestrictionGeoBundle b = build_restriction_geometric(p);
    int depth = b.sc.depth();
    Rat c(9, 10), theta(1, 2);
    for (int n = depth; n >= 1; --n) {
      try {
        BohrPointSet bp = bohr_points(b, n, c, theta, 512);
        reports.push_back(resonance_check(b, n, bp.points));
        break;
      } catch (const EmptyBohrSet&) {
        if (n == 1) throw;
      }
    }
    reports.push_back(wn_vn_energy(b, depth, Rat(1, 4), 4096));
  } else if (p.name == "restriction-nongeo") {
    RestrictionNongeoFamily fam = build_restriction_nongeometric(p);
    reports.push_back(nongeo_resonance_certificate(fam, 64, p.seed + 1));
  }

  bool ok = true;
  for (auto& rep : reports) {
    write_report(cfg, rep, p);
    if (!rep.all_pass()) ok = false;
    if (cfg.verbosity > 0)
      std::cerr << rep.name << ": " << (rep.all_pass() ? "pass" : "FAIL") << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_experiment(const RunConfig& cfg) {
  json doc = load_params_doc(cfg);
  json ex = doc.value("experiment", json::object());
  doc.erase("experiment");
  ConstructionParams p = params_from_json(doc.dump());
  auto exrat = [&](const char* key, const char* dflt) {
    return parse_rational(ex.value(key, std::string(dflt)));
  };
  Rat ia = exrat("inv_p", "1/2"), ib = exrat("inv_q", "1/2");

  ExperimentReport rep;
  if (p.name == "geo-factorization") {
    FactorizedMeasure fm = build_geometric_factorization(p);
    std::vector<Int> nums;
    if (ex.contains("delta_nums"))
      for (const auto& v : ex.at("delta_nums")) nums.push_back(Int(v.get<long long>()));
    else {
      // default: three lattice scales MM_N / MM_k
      int N = fm.sc.depth();
      for (int k = 1; k <= std::min(3, N); ++k) nums.push_back(fm.sc.MM[N] / fm.sc.MM[k]);
    }
    rep = conv_sharpness_geometric(fm, p.alpha, p.beta, ia, ib, nums,
                                   ex.value("grid_points", 2048));
  } else if (p.name == "heavy-core") {
    HeavyCoreMeasure hc = build_heavy_core(p);
    std::vector<Rat> deltas;
    if (ex.contains("deltas"))
      for (const auto& v : ex.at("deltas")) deltas.push_back(parse_rational(v.get<std::string>()));
    else {
      int N = hc.fam.sc.depth();
      for (int k = 1; k <= std::min(3, N); ++k) deltas.push_back(Rat(1, hc.fam.sc.MM[k]));
    }
    rep = conv_sharpness_nongeometric(hc, p.alpha, p.beta, ia, ib, deltas,
                                      ex.value("grid_points", 2048));
  } else if (p.name == "restriction-geo") {
    RestrictionGeoBundle b = build_restriction_geometric(p);
    rep = restriction_experiment_geo(b, p.alpha, p.beta, ia, ib, exrat("c", "9/10"),
                                     exrat("theta", "1/2"));
  } else if (p.name == "restriction-nongeo") {
    RestrictionNongeoFamily fam = build_restriction_nongeometric(p);
    rep = restriction_experiment_nongeo(fam, p.alpha, p.beta, ia, ib,
                                        ex.value("xi_per_level", 64), p.seed + 2);
  } else if (p.name == "salem") {
    SalemBuild b = build_salem(p);
    XiSpec spec;
    spec.per_annulus = ex.value("per_annulus", 32);
    spec.seed = p.seed + 3;
    rep = fourier_decay_profile(b.fam.levels.back(), p.alpha / 2, spec,
                                ex.value("declared_B", 8.0));
  } else {
    throw ValidationError("unknown construction: " + p.name);
  }
  write_report(cfg, rep, p);
  if (cfg.verbosity > 0)
    std::cerr << rep.name << ": " << (rep.all_pass() ? "pass" : "FAIL") << "\n";
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized multiscale fractal measure constructions"};
  app.require_subcommand(1);
  RunConfig cfg;
  if (const char* env = std::getenv("FRACTAL_OUT")) cfg.out_dir = env;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--params", cfg.params_path, "parameter document (JSON)")->required();
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--seed", cfg.seed, "global seed (overrides the document)")
        ->each([&](const std::string&) { cfg.seed_set = true; });
    sub->add_option("--preset", cfg.preset, "constant preset: paper-constants | desk-scale");
    sub->add_option("--threads", cfg.threads, "worker cap");
    sub->add_flag("-v,--verbose", cfg.verbosity, "verbosity");
  };
  CLI::App* c_construct = app.add_subcommand("construct", "build a construction");
  CLI::App* c_verify = app.add_subcommand("verify", "run the verification suite");
  CLI::App* c_experiment = app.add_subcommand("experiment", "run an experiment");
  add_common(c_construct);
  add_common(c_verify);
  add_common(c_experiment);

  CLI11_PARSE(app, argc, argv);
  try {
    if (c_construct->parsed()) return cmd_construct(cfg);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_experiment->parsed()) return cmd_experiment(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
