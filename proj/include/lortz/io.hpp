#pragma once

// Run configuration (YAML), JSON with fixed 17-digit floats, field CSV files
// and the residual re-check used by `verify`.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lortz/bernoulli.hpp"
#include "lortz/dispersion.hpp"
#include "lortz/solver.hpp"

namespace lortz {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct ToleranceSet {
  double picard = 1e-11;
  double eta = 1e-11;
  double newton = 1e-10;
  double newton_step = 1e-6;
  double n0_step = 1e-4;
  double delta_factor = 0.1;
  double epsilon_factor = 0.05;
  double sigma_margin = 1e-6;
  double root_tol = 1e-9;
  double verify = 1e-12;
};

struct RunConfig {
  LatticeSpec lattice;
  // h(q) = sum_n h_coeffs[n] (q - q0)^n with q0 = lambda1/c*; empty means beta (q - q0).
  std::vector<double> h_coeffs;
  double beta = 0.01;
  std::vector<double> t_list{1e-3, 3e-3, 1e-2};
  ToleranceSet tol;
  int kmax = 10;
  std::string output_dir = "lortz_run";
  std::uint64_t seed = 0;
  // bernoulli
  int levels = 5;           // sampled K values inside I
  int samples = 201;        // x2 samples per t = 0 curve
  bool full_surfaces = false;

  // Throws ConfigError.
  void validate() const;
};

RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& cfg);

BernoulliFunctionH make_h(const RunConfig& cfg);
SolverOptions make_solver_options(const RunConfig& cfg);

// Every double printed with 17 significant digits; keys in insertion order.
std::string dump_json(const Json& j, int indent = 2);
Json config_json(const RunConfig& cfg);
Json dispersion_json(const DispersionResult& r);
Json residuals_json(const FlattenedResiduals& r);
Json branch_point_json(const BranchPoint& b);
Json classification_json(const BernoulliClassification& c);

// Writes to a temporary sibling and renames.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// x1,x2[,x3],values in storage order.
std::string field_csv(const SurfaceField& f);
std::string field_csv(const ScalarField& f);
std::string field_csv(const VectorField& f);
SurfaceField read_surface_csv(GridPtr g, const std::string& text, Parity p = {});
VectorField read_vector_csv(GridPtr g, const std::string& text, SymmetryClass s = SymmetryClass::none);

// K,segment,x2,x3 rows over the defined part of a t = 0 surface; level surfaces
// on a grid as x1,x2,psi.
std::string curve_csv(const std::vector<LevelSurface>& curves);
std::string surface_grid_csv(const LevelSurface& s);

struct Recheck {
  FlattenedResiduals residuals;
  double diamond = 0.0, symmetry = 0.0;
};
// Residuals of (eta, u, c) recomputed from the fields alone.
Recheck recheck_point(const SurfaceField& eta, const VectorField& u, double c, const BernoulliFunctionH& h,
                      const SolverOptions& opt);
Json recheck_json(const Recheck& r);

}  // namespace lortz
