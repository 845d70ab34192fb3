// lortz: command-line driver.
//
//   lortz dispersion [-c cfg] [-o dir]
//   lortz expand     [-c cfg] [-o dir]
//   lortz solve      [-c cfg] [-o dir] [--verify]
//   lortz bernoulli  [-c cfg] [-o dir] [--regimes]
//   lortz verify     <dir>
//
// Exit codes: 0 ok, 2 config error, 3 out of regime, 4 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "lortz/bernoulli.hpp"
#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"
#include "lortz/expansion.hpp"
#include "lortz/io.hpp"
#include "lortz/solver.hpp"

using namespace lortz;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  bool quiet = false;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

Json meta_header(const RunConfig& cfg, const std::string& sub) {
  Json m;
  m["tool"] = "lortz";
  m["version"] = kVersion;
  m["subcommand"] = sub;
  m["config"] = config_json(cfg);
  m["resolution"] = {{"n1", cfg.lattice.n1}, {"n2", cfg.lattice.n2}, {"nz", cfg.lattice.nz}};
  return m;
}

void write_run(const RunConfig& cfg, const Json& meta) {
  const fs::path dir = cfg.output_dir;
  write_text_atomic(dir / "config.yaml", dump_config(cfg));
  write_text_atomic(dir / "meta.json", dump_json(meta) + "\n");
}

Json modes_json(const CosModes& m) { return Json::array({m[0], m[1], m[2], m[3]}); }

int cmd_dispersion(const Common& c) {
  const RunConfig cfg = load(c);
  ScanOptions so;
  so.sigma_margin = cfg.tol.sigma_margin;
  so.root_tol = cfg.tol.root_tol;
  const DispersionResult r = kernel_scan(cfg.lattice, cfg.kmax, so);
  Json meta = meta_header(cfg, "dispersion");
  meta["dispersion"] = dispersion_json(r);
  write_run(cfg, meta);
  if (!c.quiet) std::cout << dump_json(meta["dispersion"]) << "\n";
  return 0;
}

int cmd_expand(const Common& c) {
  const RunConfig cfg = load(c);
  const GridPtr g = make_grid(cfg.lattice);
  const double cs = c_star(cfg.lattice);
  const BernoulliFunctionH h = make_h(cfg);
  const ExpansionData e = expand(g, cs, h);
  Json ex;
  ex["c_star"] = cs;
  ex["q0"] = e.q0;
  ex["Qprime"] = e.Qprime;
  ex["hprime_q0"] = e.hprime0;
  ex["q1"] = e.q1;
  ex["U1"] = e.U1;
  ex["U2"] = e.U2;
  ex["modes"] = Json::array({"1", "cos(2k1x1)", "cos(2k2x2)", "cos(2k1x1)cos(2k2x2)"});
  ex["eta2_a"] = modes_json(e.eta2.a);
  ex["ell"] = modes_json(e.eta2.ell);
  ex["eta2_amp"] = modes_json(e.eta2.amp);
  ex["alpha1_amp"] = modes_json(e.second.alpha_amp);
  ex["checks"] = {{"BM_identity", BM_identity_defect(g, cs)},
                  {"grad_phi1_display", grad_phi1_display_defect(g, cs)},
                  {"first_order_dynamic", sup(first_order_dynamic_residual(g, cs))},
                  {"U2_quadrature", U2_quadrature(g, cs, h)}};
  Json meta = meta_header(cfg, "expand");
  meta["expansion"] = ex;
  const fs::path f = fs::path(cfg.output_dir) / "fields";
  write_text_atomic(f / "eta1.csv", field_csv(e.eta1));
  write_text_atomic(f / "eta2.csv", field_csv(e.eta2.eta2));
  write_text_atomic(f / "alpha1.csv", field_csv(e.second.alpha1));
  write_text_atomic(f / "phi1.csv", field_csv(e.first.phi1));
  write_text_atomic(f / "phi2.csv", field_csv(e.second.phi2));
  write_text_atomic(f / "u1.csv", field_csv(e.first.u1));
  write_text_atomic(f / "q2.csv", field_csv(e.q2));
  write_text_atomic(f / "omega2.csv", field_csv(e.omega2));
  write_run(cfg, meta);
  if (!c.quiet) std::cout << dump_json(ex) << "\n";
  return 0;
}

std::string point_name(size_t i) {
  std::ostringstream os;
  os << "point_" << i;
  return os.str();
}

int verify_dir(const fs::path& dir, bool quiet) {
  const RunConfig cfg = load_config(dir / "config.yaml");
  const GridPtr g = make_grid(cfg.lattice);
  const BernoulliFunctionH h = make_h(cfg);
  const SolverOptions opt = make_solver_options(cfg);
  std::istringstream lines(read_text(dir / "branch.jsonl"));
  std::string line;
  double worst = 0.0;
  Json report = Json::array();
  size_t i = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const Json stored = Json::parse(line);
    const SurfaceField eta =
        read_surface_csv(g, read_text(dir / "fields" / (point_name(i) + "_eta.csv")), Parity{1, 1});
    const VectorField u =
        read_vector_csv(g, read_text(dir / "fields" / (point_name(i) + "_u.csv")), SymmetryClass::plus);
    const Json now = recheck_json(recheck_point(eta, u, stored["c"].get<double>(), h, opt));
    double dev = 0.0;
    for (auto it = now.begin(); it != now.end(); ++it) {
      const double a = it.value().get<double>(), b = stored["recheck"][it.key()].get<double>();
      dev = std::max(dev, std::abs(a - b));
    }
    worst = std::max(worst, dev);
    report.push_back({{"t", stored["t"]}, {"max_deviation", dev}, {"recheck", now}});
    ++i;
  }
  const bool ok = worst <= cfg.tol.verify;
  Json v{{"points", report}, {"max_deviation", worst}, {"tolerance", cfg.tol.verify}, {"pass", ok}};
  write_text_atomic(dir / "verify.json", dump_json(v) + "\n");
  if (!quiet) std::cout << "verify: " << i << " points, max deviation " << worst << (ok ? " (pass)" : " (FAIL)") << "\n";
  return ok ? 0 : 4;
}

int cmd_solve(const Common& c, bool verify) {
  const RunConfig cfg = load(c);
  const GridPtr g = make_grid(cfg.lattice);
  const BernoulliFunctionH h = make_h(cfg);
  SolverOptions opt = make_solver_options(cfg);
  if (!c.quiet) opt.log = [](const std::string& s) { std::cerr << s << "\n"; };
  const std::vector<BranchPoint> br = continue_branch(g, h, cfg.t_list, opt);
  const fs::path dir = cfg.output_dir;
  std::string jsonl;
  Json points = Json::array();
  for (size_t i = 0; i < br.size(); ++i) {
    const BranchPoint& b = br[i];
    const std::string eta_csv = field_csv(b.eta), u_csv = field_csv(b.u);
    write_text_atomic(dir / "fields" / (point_name(i) + "_eta.csv"), eta_csv);
    write_text_atomic(dir / "fields" / (point_name(i) + "_u.csv"), u_csv);
    write_text_atomic(dir / "fields" / (point_name(i) + "_q.csv"), field_csv(b.tf.q));
    // the stored re-check starts from the serialized fields, as verify does
    const SurfaceField eta = read_surface_csv(g, eta_csv, Parity{1, 1});
    const VectorField u = read_vector_csv(g, u_csv, SymmetryClass::plus);
    Json j = branch_point_json(b);
    j["recheck"] = recheck_json(recheck_point(eta, u, b.c, h, opt));
    jsonl += dump_json(j, 0) + "\n";
    points.push_back(j);
  }
  write_text_atomic(dir / "branch.jsonl", jsonl);
  Json meta = meta_header(cfg, "solve");
  meta["c_star"] = c_star(cfg.lattice);
  meta["points"] = points;
  write_run(cfg, meta);
  if (!c.quiet)
    for (const auto& b : br)
      std::cout << "t = " << b.t << "  c = " << b.c << "  residual " << b.residuals.max() << "\n";
  return verify ? verify_dir(dir, c.quiet) : 0;
}

std::vector<double> sample_levels(const BernoulliClassification& cls, int n) {
  std::vector<double> K;
  for (int j = 0; j < n; ++j) K.push_back(cls.I.lo + (cls.I.hi - cls.I.lo) * (j + 1.0) / (n + 1.0));
  return K;
}

Json classify_and_trace(const LatticeSpec& spec, const BernoulliFunctionH& h, const RunConfig& cfg,
                        const fs::path& curve_path, BernoulliClassification* out = nullptr) {
  const BernoulliClassification cls = classify(spec, c_star(spec), h);
  std::vector<LevelSurface> curves;
  Json levels = Json::array();
  for (double K : sample_levels(cls, cfg.levels)) {
    curves.push_back(level_surface_q2(spec, K, cfg.samples));
    levels.push_back({{"K", K}, {"q2", cls.q_of_K(K)}, {"kind", to_string(curves.back().kind)},
                      {"defined_samples", curves.back().count()}});
  }
  write_text_atomic(curve_path, curve_csv(curves));
  Json j = classification_json(cls);
  j["levels"] = levels;
  j["curves"] = fs::relative(curve_path, cfg.output_dir).string();
  if (out) *out = cls;
  return j;
}

int cmd_bernoulli(const Common& c, bool regimes) {
  const RunConfig cfg = load(c);
  const fs::path dir = cfg.output_dir;
  Json meta = meta_header(cfg, "bernoulli");
  if (regimes) {
    // |kappa| d = log(1 + sqrt 2), d = 1; kappa2 = |kappa|/2 and |kappa|/sqrt 2
    const double K = std::log(1.0 + std::sqrt(2.0));
    Json cases = Json::array();
    int n = 0;
    for (double k2 : {K / 2.0, K / std::sqrt(2.0)}) {
      LatticeSpec s = LatticeSpec::from_wavenumbers(std::sqrt(K * K - k2 * k2), k2, 1.0, cfg.lattice.g,
                                                    cfg.lattice.sigma, cfg.lattice.n1, cfg.lattice.n2, cfg.lattice.nz);
      const BernoulliFunctionH h = BernoulliFunctionH::affine(cfg.beta, s.lambda1 / c_star(s));
      cases.push_back(classify_and_trace(s, h, cfg, dir / "curves" / ("regimes_" + std::to_string(n++) + ".csv")));
    }
    meta["regimes"] = cases;
  } else {
    const BernoulliFunctionH h = make_h(cfg);
    BernoulliClassification cls;
    meta["classification"] = classify_and_trace(cfg.lattice, h, cfg, dir / "curves" / "q2_levels.csv", &cls);
    if (cfg.full_surfaces) {
      const GridPtr g = make_grid(cfg.lattice);
      const std::vector<BranchPoint> br = continue_branch(g, h, cfg.t_list, make_solver_options(cfg));
      Json full = Json::array();
      for (size_t i = 0; i < br.size(); ++i) {
        if (br[i].t == 0.0) continue;
        const auto Ks = sample_levels(cls, cfg.levels);
        for (size_t k = 0; k < Ks.size(); ++k) {
          const LevelSurface s = to_physical(level_surface_full(br[i], cls, Ks[k]), br[i].eta);
          const std::string name = "full_" + std::to_string(i) + "_" + std::to_string(k) + ".csv";
          write_text_atomic(dir / "curves" / name, surface_grid_csv(s));
          full.push_back({{"t", br[i].t}, {"K", Ks[k]}, {"kind", to_string(s.kind)}, {"defined_nodes", s.count()},
                          {"file", "curves/" + name}, {"physical", true}});
        }
      }
      meta["full_surfaces"] = full;
    }
  }
  write_run(cfg, meta);
  if (!c.quiet) std::cout << dump_json(regimes ? meta["regimes"] : meta["classification"]) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady three-dimensional rotational capillary-gravity waves: branch solver and diagnostics"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* s) {
    s->add_option("-c,--config", common.config, "YAML run configuration")->check(CLI::ExistingFile);
    s->add_option("-o,--out", common.out, "output directory (overrides output_dir)");
    s->add_flag("-q,--quiet", common.quiet, "no console output");
  };
  auto* disp = app.add_subcommand("dispersion", "bifurcation speed and kernel scan");
  add_common(disp);
  auto* exp = app.add_subcommand("expand", "closed-form second-order expansion");
  add_common(exp);
  bool verify_flag = false, regimes = false;
  auto* solve = app.add_subcommand("solve", "branch points for the configured t_list");
  add_common(solve);
  solve->add_flag("--verify", verify_flag, "re-check residuals from the written fields");
  auto* bern = app.add_subcommand("bernoulli", "Bernoulli surface classification and level curves");
  add_common(bern);
  bern->add_flag("--regimes", regimes, "the two |kappa| d = log(1 + sqrt 2) regimes");
  std::string vdir;
  auto* ver = app.add_subcommand("verify", "re-check a solve output directory");
  ver->add_option("dir", vdir, "solve output directory")->required()->check(CLI::ExistingDirectory);
  ver->add_flag("-q,--quiet", common.quiet, "no console output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*disp) return cmd_dispersion(common);
    if (*exp) return cmd_expand(common);
    if (*solve) return cmd_solve(common, verify_flag);
    if (*bern) return cmd_bernoulli(common, regimes);
    if (*ver) return verify_dir(vdir, common.quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const OutOfRegimeError& e) {
    std::cerr << "out of regime: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
