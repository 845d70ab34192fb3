#pragma once

// Bernoulli surfaces: level sets of q (equivalently of H = h(q) when
// h'(q0) != 0). At t = 0 they are read off the second-order correction
// q2 = qfrak(K(x2, x3)); for t != 0 they are extracted from the numeric q of
// a branch point.

#include <string>
#include <vector>

#include "lortz/expansion.hpp"
#include "lortz/solver.hpp"

namespace lortz {

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool empty() const { return !(lo < hi); }
  bool contains(double x) const { return lo < x && x < hi; }
};

struct ToriConditions {
  bool raw = false;     // min(k2^2 C^2, k1^2 C^2 + |k|^2 S^2) > max(k1^2, k2^2)
  bool kappa = false;   // |k|^2/(1 + C^2) < k2^2 < |k|^2 cosh(2|k|d)/(1 + C^2)
  bool from_profiles = false;  // I_ring nonempty from K+- evaluated at the planes
  double margin = 0.0;  // relative gap of the raw condition; sign gives the answer
  bool upper_trivial = false;  // |k| d >= log(1 + sqrt 2)
};
// C = cosh(|k| d), S = sinh(|k| d)
ToriConditions tori_conditions(double kappa1, double kappa2, double d);

struct BernoulliClassification {
  LatticeSpec spec;
  double c_star = 0.0;
  double Kp_bottom = 0.0, Km_bottom = 0.0, Kp_top = 0.0, Km_top = 0.0;
  Interval I;       // (min of the bottom values, max of the top values)
  Interval I_ring;  // (max of the bottom values, min of the top values)
  bool tori_exist = false;
  bool indeterminate = false;  // equality case within tolerance
  ToriConditions conditions;
  // qfrak(K) = q_slope (K - q_shift)
  double q_slope = 0.0, q_shift = 0.0;
  double hprime0 = 0.0;

  double q_of_K(double K) const { return q_slope * (K - q_shift); }
  double K_plus(double x3) const;
  double K_minus(double x3) const;
};

// Throws ConfigError when h'(q0) = 0 (q no longer determines H).
BernoulliClassification classify(const LatticeSpec& spec, double c_star, const BernoulliFunctionH& h,
                                 double equality_tol = 1e-12);

// Sign changes of K+ - K- on a uniform sampling of [-d, 0].
int crossing_count(const LatticeSpec& spec, int samples = 4001);

enum class SurfaceKind { empty, annulus, torus };
std::string to_string(SurfaceKind k);

struct LevelSurface {
  double K = 0.0;
  SurfaceKind kind = SurfaceKind::empty;
  bool physical = false;
  // psi[i1 * x2.size() + i2] over the sample points; NaN outside the domain.
  // Surfaces of q2 do not depend on x1 and carry a single x1 row.
  std::vector<double> x1, x2;
  std::vector<double> psi;
  std::vector<char> mask;
  double t = 0.0;
  double x3_floor = 0.0;  // lowest x3 searched (-d at t = 0, -d + epsilon otherwise)

  int count() const;
  double at(size_t i1, size_t i2) const { return psi[i1 * x2.size() + i2]; }
};

// Solves K(x2, psi) = K per sample x2 by bisection with a Newton polish
// (tolerance 1e-12 d). x2 samples are uniform on [0, lambda2].
LevelSurface level_surface_q2(const LatticeSpec& spec, double K, int samples = 201);

struct FullSurfaceOptions {
  double epsilon_floor = -1.0;  // default 1e-3 d
  double tol = 1e-12;           // relative to d
};

// Level q[c(t), t] = lambda1/c(t) + qfrak(K) t^2 of a branch point on the
// horizontal collocation nodes, searched on x3 >= -d + epsilon. Throws
// OutOfRegimeError when d3 q <= 0 on the searched slab.
LevelSurface level_surface_full(const BranchPoint& bp, const BernoulliClassification& cls, double K,
                                const FullSurfaceOptions& opt = {});

// psi_hat = psi + eta (1 + psi/d)
LevelSurface to_physical(const LevelSurface& s, const SurfaceField& eta);

}  // namespace lortz
