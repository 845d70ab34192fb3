#include "lortz/io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lortz/errors.hpp"
#include "lortz/flattening.hpp"
#include "lortz/transport.hpp"

namespace lortz {

namespace fs = std::filesystem;

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) throw ConfigError(where + ": expected a mapping");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
void get(const YAML::Node& n, const char* key, T& out, const std::string& where) {
  if (!n[key]) return;
  try {
    out = n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void json_write(std::ostringstream& os, const Json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(size_t(indent) * (depth + 1), ' ') : "";
  const std::string end = indent > 0 ? std::string(size_t(indent) * depth, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) { os << "{}"; return; }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << sep;
        json_write(os, it.value(), indent, depth + 1);
      }
      os << nl << end << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) { os << "[]"; return; }
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat || indent == 0) {
        os << '[';
        bool first = true;
        for (const auto& v : j) {
          if (!first) os << (indent > 0 ? ", " : ",");
          first = false;
          json_write(os, v, indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        json_write(os, v, indent, depth + 1);
      }
      os << nl << end << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) os << g17(x);
      else os << "null";
      return;
    }
    default: os << j.dump();
  }
}

std::vector<std::vector<double>> parse_csv(const std::string& text, size_t cols) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
    if (r.size() != cols) throw ConfigError("csv: expected " + std::to_string(cols) + " columns");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

void RunConfig::validate() const {
  lattice.validate();
  const ToleranceSet& t = tol;
  for (double v : {t.picard, t.eta, t.newton, t.newton_step, t.n0_step, t.delta_factor, t.epsilon_factor,
                   t.sigma_margin, t.root_tol, t.verify})
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("tolerances must be positive and finite");
  if (t_list.empty()) throw ConfigError("t_list must not be empty");
  std::set<double> seen;
  for (double x : t_list) {
    if (!std::isfinite(x)) throw ConfigError("t_list values must be finite");
    if (!seen.insert(x).second) throw ConfigError("t_list values must be distinct");
  }
  if (kmax < 1) throw ConfigError("dispersion.kmax must be >= 1");
  if (levels < 1) throw ConfigError("bernoulli.levels must be >= 1");
  if (samples < 3) throw ConfigError("bernoulli.samples must be >= 3");
  if (!std::isfinite(beta)) throw ConfigError("h.beta must be finite");
  for (double a : h_coeffs)
    if (!std::isfinite(a)) throw ConfigError("h.coeffs must be finite");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  if (!root || root.IsNull()) {
    c.validate();
    return c;
  }
  check_keys(root, "config",
             {"lattice", "h", "t_list", "tolerances", "dispersion", "bernoulli", "output_dir", "seed"});
  if (auto l = root["lattice"]) {
    check_keys(l, "lattice", {"kappa1", "kappa2", "lambda1", "lambda2", "d", "g", "sigma", "n1", "n2", "nz"});
    if ((l["kappa1"] && l["lambda1"]) || (l["kappa2"] && l["lambda2"]))
      throw ConfigError("lattice: give either kappa or lambda per direction");
    LatticeSpec& s = c.lattice;
    double k1 = 0.0, k2 = 0.0;
    get(l, "kappa1", k1, "lattice");
    get(l, "kappa2", k2, "lattice");
    if (l["kappa1"]) {
      if (!(k1 > 0)) throw ConfigError("lattice.kappa1 must be positive");
      s.lambda1 = kTwoPi / k1;
    }
    if (l["kappa2"]) {
      if (!(k2 > 0)) throw ConfigError("lattice.kappa2 must be positive");
      s.lambda2 = kTwoPi / k2;
    }
    get(l, "lambda1", s.lambda1, "lattice");
    get(l, "lambda2", s.lambda2, "lattice");
    get(l, "d", s.d, "lattice");
    get(l, "g", s.g, "lattice");
    get(l, "sigma", s.sigma, "lattice");
    get(l, "n1", s.n1, "lattice");
    get(l, "n2", s.n2, "lattice");
    get(l, "nz", s.nz, "lattice");
  }
  if (auto h = root["h"]) {
    check_keys(h, "h", {"beta", "coeffs"});
    get(h, "beta", c.beta, "h");
    get(h, "coeffs", c.h_coeffs, "h");
  }
  get(root, "t_list", c.t_list, "config");
  if (auto t = root["tolerances"]) {
    check_keys(t, "tolerances",
               {"picard", "eta", "newton", "newton_step", "n0_step", "delta_factor", "epsilon_factor",
                "sigma_margin", "root_tol", "verify"});
    ToleranceSet& o = c.tol;
    get(t, "picard", o.picard, "tolerances");
    get(t, "eta", o.eta, "tolerances");
    get(t, "newton", o.newton, "tolerances");
    get(t, "newton_step", o.newton_step, "tolerances");
    get(t, "n0_step", o.n0_step, "tolerances");
    get(t, "delta_factor", o.delta_factor, "tolerances");
    get(t, "epsilon_factor", o.epsilon_factor, "tolerances");
    get(t, "sigma_margin", o.sigma_margin, "tolerances");
    get(t, "root_tol", o.root_tol, "tolerances");
    get(t, "verify", o.verify, "tolerances");
  }
  if (auto d = root["dispersion"]) {
    check_keys(d, "dispersion", {"kmax"});
    get(d, "kmax", c.kmax, "dispersion");
  }
  if (auto b = root["bernoulli"]) {
    check_keys(b, "bernoulli", {"levels", "samples", "full_surfaces"});
    get(b, "levels", c.levels, "bernoulli");
    get(b, "samples", c.samples, "bernoulli");
    get(b, "full_surfaces", c.full_surfaces, "bernoulli");
  }
  get(root, "output_dir", c.output_dir, "config");
  get(root, "seed", c.seed, "config");
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lambda1" << YAML::Value << c.lattice.lambda1;
  e << YAML::Key << "lambda2" << YAML::Value << c.lattice.lambda2;
  e << YAML::Key << "d" << YAML::Value << c.lattice.d;
  e << YAML::Key << "g" << YAML::Value << c.lattice.g;
  e << YAML::Key << "sigma" << YAML::Value << c.lattice.sigma;
  e << YAML::Key << "n1" << YAML::Value << c.lattice.n1;
  e << YAML::Key << "n2" << YAML::Value << c.lattice.n2;
  e << YAML::Key << "nz" << YAML::Value << c.lattice.nz;
  e << YAML::EndMap;
  e << YAML::Key << "h" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "beta" << YAML::Value << c.beta;
  if (!c.h_coeffs.empty()) e << YAML::Key << "coeffs" << YAML::Value << YAML::Flow << c.h_coeffs;
  e << YAML::EndMap;
  e << YAML::Key << "t_list" << YAML::Value << YAML::Flow << c.t_list;
  const ToleranceSet& t = c.tol;
  e << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "picard" << YAML::Value << t.picard;
  e << YAML::Key << "eta" << YAML::Value << t.eta;
  e << YAML::Key << "newton" << YAML::Value << t.newton;
  e << YAML::Key << "newton_step" << YAML::Value << t.newton_step;
  e << YAML::Key << "n0_step" << YAML::Value << t.n0_step;
  e << YAML::Key << "delta_factor" << YAML::Value << t.delta_factor;
  e << YAML::Key << "epsilon_factor" << YAML::Value << t.epsilon_factor;
  e << YAML::Key << "sigma_margin" << YAML::Value << t.sigma_margin;
  e << YAML::Key << "root_tol" << YAML::Value << t.root_tol;
  e << YAML::Key << "verify" << YAML::Value << t.verify;
  e << YAML::EndMap;
  e << YAML::Key << "dispersion" << YAML::Value << YAML::BeginMap << YAML::Key << "kmax" << YAML::Value << c.kmax
    << YAML::EndMap;
  e << YAML::Key << "bernoulli" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "levels" << YAML::Value << c.levels;
  e << YAML::Key << "samples" << YAML::Value << c.samples;
  e << YAML::Key << "full_surfaces" << YAML::Value << c.full_surfaces;
  e << YAML::EndMap;
  e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

BernoulliFunctionH make_h(const RunConfig& c) {
  const double q0 = c.lattice.lambda1 / c_star(c.lattice);
  if (c.h_coeffs.empty()) return BernoulliFunctionH::affine(c.beta, q0);
  BernoulliFunctionH h = BernoulliFunctionH::polynomial(c.h_coeffs, q0);
  return h;
}

SolverOptions make_solver_options(const RunConfig& c) {
  SolverOptions o;
  o.picard_tol = c.tol.picard;
  o.eta_tol = c.tol.eta;
  o.newton_tol = c.tol.newton;
  o.newton_step = c.tol.newton_step;
  o.n0_step = c.tol.n0_step;
  o.delta_factor = c.tol.delta_factor;
  o.epsilon_factor = c.tol.epsilon_factor;
  o.kernel_kmax = c.kmax;
  o.tie_tolerances();
  return o;
}

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  json_write(os, j, indent, 0);
  return os.str();
}

Json config_json(const RunConfig& c) {
  const LatticeSpec& s = c.lattice;
  Json j;
  j["lattice"] = {{"lambda1", s.lambda1}, {"lambda2", s.lambda2}, {"kappa1", s.kappa1()}, {"kappa2", s.kappa2()},
                  {"d", s.d}, {"g", s.g}, {"sigma", s.sigma}, {"n1", s.n1}, {"n2", s.n2}, {"nz", s.nz}};
  j["h"] = {{"beta", c.beta}, {"coeffs", c.h_coeffs}};
  j["t_list"] = c.t_list;
  const ToleranceSet& t = c.tol;
  j["tolerances"] = {{"picard", t.picard}, {"eta", t.eta}, {"newton", t.newton}, {"newton_step", t.newton_step},
                     {"n0_step", t.n0_step}, {"delta_factor", t.delta_factor},
                     {"epsilon_factor", t.epsilon_factor}, {"sigma_margin", t.sigma_margin},
                     {"root_tol", t.root_tol}, {"verify", t.verify}};
  j["kmax"] = c.kmax;
  j["bernoulli"] = {{"levels", c.levels}, {"samples", c.samples}, {"full_surfaces", c.full_surfaces}};
  j["seed"] = c.seed;
  return j;
}

Json dispersion_json(const DispersionResult& r) {
  auto modes = [](const std::vector<KernelMode>& v) {
    Json a = Json::array();
    for (const auto& m : v) a.push_back({{"m1", m.m1}, {"m2", m.m2}, {"value", m.value}});
    return a;
  };
  Json j;
  j["c_star"] = r.c_star;
  j["simple_kernel"] = r.simple_kernel;
  j["solutions"] = modes(r.solutions);
  j["sigma_star_hits"] = modes(r.sigma_star_hits);
  j["degenerate"] = modes(r.degenerate);
  j["scan"] = {{"kmax", r.kmax}, {"sigma_margin", r.sigma_margin}, {"root_tol", r.root_tol},
               {"note", "finite scan over |m1|, |m2| <= kmax; sigma margin is an artifact choice"}};
  return j;
}

Json residuals_json(const FlattenedResiduals& r) {
  return {{"euler", r.euler},       {"divergence", r.divergence}, {"time", r.time},
          {"time_boundary", r.time_boundary}, {"integral", r.integral},     {"kinematic", r.kinematic},
          {"dynamic", r.dynamic},   {"max", r.max()}};
}

Json branch_point_json(const BranchPoint& b) {
  Json j;
  j["t"] = b.t;
  j["c"] = b.c;
  j["sup_eta"] = b.eta.grid ? sup(b.eta) : 0.0;
  j["residuals"] = residuals_json(b.residuals);
  j["residual_N"] = b.residual_N;
  j["picard_residual"] = b.picard_residual;
  j["iterations"] = {{"picard", b.picard_iterations}, {"eta", b.eta_iterations}, {"newton", b.newton_iterations}};
  j["contraction"] = {{"velocity", b.velocity_contraction}, {"eta", b.eta_contraction}};
  j["diamond_defect"] = b.diamond_defect;
  j["symmetry_defect"] = b.symmetry_defect;
  return j;
}

Json classification_json(const BernoulliClassification& c) {
  Json j;
  j["c_star"] = c.c_star;
  j["kappa1"] = c.spec.kappa1();
  j["kappa2"] = c.spec.kappa2();
  j["d"] = c.spec.d;
  j["K_plus"] = {{"bottom", c.Kp_bottom}, {"top", c.Kp_top}};
  j["K_minus"] = {{"bottom", c.Km_bottom}, {"top", c.Km_top}};
  j["I"] = {c.I.lo, c.I.hi};
  j["I_ring"] = {c.I_ring.lo, c.I_ring.hi};
  j["tori_exist"] = c.tori_exist;
  j["indeterminate"] = c.indeterminate;
  j["conditions"] = {{"raw", c.conditions.raw}, {"kappa", c.conditions.kappa},
                     {"from_profiles", c.conditions.from_profiles}, {"margin", c.conditions.margin},
                     {"upper_trivial", c.conditions.upper_trivial}};
  j["hprime_q0"] = c.hprime0;
  j["qfrak"] = {{"slope", c.q_slope}, {"shift", c.q_shift}};
  j["crossings"] = crossing_count(c.spec);
  return j;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field_csv(const SurfaceField& f) {
  const Grid& g = *f.grid;
  std::string s = "x1,x2,value\n";
  for (int i1 = 0; i1 < g.n1(); ++i1)
    for (int i2 = 0; i2 < g.n2(); ++i2)
      s += g17(g.x1()[i1]) + "," + g17(g.x2()[i2]) + "," + g17(f.at(i1, i2)) + "\n";
  return s;
}

std::string field_csv(const ScalarField& f) {
  const Grid& g = *f.grid;
  std::string s = "x1,x2,x3,value\n";
  for (int j = 0; j < g.nz(); ++j)
    for (int i1 = 0; i1 < g.n1(); ++i1)
      for (int i2 = 0; i2 < g.n2(); ++i2)
        s += g17(g.x1()[i1]) + "," + g17(g.x2()[i2]) + "," + g17(g.z()[j]) + "," + g17(f.at(j, i1, i2)) + "\n";
  return s;
}

std::string field_csv(const VectorField& f) {
  const Grid& g = *f.grid();
  std::string s = "x1,x2,x3,u1,u2,u3\n";
  for (int j = 0; j < g.nz(); ++j)
    for (int i1 = 0; i1 < g.n1(); ++i1)
      for (int i2 = 0; i2 < g.n2(); ++i2)
        s += g17(g.x1()[i1]) + "," + g17(g.x2()[i2]) + "," + g17(g.z()[j]) + "," + g17(f[0].at(j, i1, i2)) + "," +
             g17(f[1].at(j, i1, i2)) + "," + g17(f[2].at(j, i1, i2)) + "\n";
  return s;
}

SurfaceField read_surface_csv(GridPtr g, const std::string& text, Parity p) {
  auto rows = parse_csv(text, 3);
  if (rows.size() != size_t(g->nh())) throw ConfigError("surface csv: row count does not match the grid");
  SurfaceField f(g, p);
  for (size_t k = 0; k < rows.size(); ++k) f.v[k] = rows[k][2];
  return f;
}

VectorField read_vector_csv(GridPtr g, const std::string& text, SymmetryClass s) {
  auto rows = parse_csv(text, 6);
  if (rows.size() != size_t(g->size())) throw ConfigError("vector csv: row count does not match the grid");
  VectorField f(g, s);
  for (size_t k = 0; k < rows.size(); ++k)
    for (int i = 0; i < 3; ++i) f[i].v[k] = rows[k][3 + i];
  return f;
}

std::string curve_csv(const std::vector<LevelSurface>& curves) {
  std::string s = "K,segment,x2,x3\n";
  for (const auto& c : curves) {
    int seg = -1;
    bool open = false;
    for (size_t i = 0; i < c.x2.size(); ++i) {
      if (!c.mask[i]) {
        open = false;
        continue;
      }
      if (!open) ++seg;
      open = true;
      s += g17(c.K) + "," + std::to_string(seg) + "," + g17(c.x2[i]) + "," + g17(c.at(0, i)) + "\n";
    }
  }
  return s;
}

std::string surface_grid_csv(const LevelSurface& ls) {
  std::string s = "x1,x2,psi\n";
  for (size_t a = 0; a < ls.x1.size(); ++a)
    for (size_t b = 0; b < ls.x2.size(); ++b)
      if (ls.mask[a * ls.x2.size() + b]) s += g17(ls.x1[a]) + "," + g17(ls.x2[b]) + "," + g17(ls.at(a, b)) + "\n";
  return s;
}

Recheck recheck_point(const SurfaceField& eta, const VectorField& u, double c, const BernoulliFunctionH& h,
                      const SolverOptions& opt) {
  TransportOptions to = opt.transport;
  if (to.delta <= 0.0) to.delta = opt.delta_factor * c_star(eta.grid->spec());
  const FlatteningData fd = build_flattening(eta);
  const TimeFunctions tf = compute_time_functions(u, fd, to);
  Recheck r;
  r.residuals = flattened_residuals(eta, u, tf, c, h);
  r.diamond = std::max(check_diamond_periodicity(eta), check_diamond_periodicity(u));
  r.symmetry = std::max(coefficient_symmetry_defect(eta, Parity{1, 1}), coefficient_symmetry_defect(u, SymmetryClass::plus));
  return r;
}

Json recheck_json(const Recheck& r) {
  Json j = residuals_json(r.residuals);
  j["diamond_defect"] = r.diamond;
  j["symmetry_defect"] = r.symmetry;
  return j;
}

}  // namespace lortz
