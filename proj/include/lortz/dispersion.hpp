#pragma once

// Linear dispersion relation of the trivial flow c e1 and the finite-mode
// kernel scan around the bifurcation speed c*.

#include <vector>

#include "lortz/lattice.hpp"

namespace lortz {

// coth(k d)/k, the vertical mean-flow factor of the harmonic extension.
double fbar(double k, double d);

// l_k(c) = g + sigma |k|^2 - c^2 k1^2 fbar(|k|); l_0 = g.
double ell(double k1, double k2, double c, const LatticeSpec& spec);
double ell_mode(int m1, int m2, double c, const LatticeSpec& spec);
// d/dc l_k(c).
double ell_dc(double k1, double k2, double c, const LatticeSpec& spec);

// Root of l_kappa(c), kappa = (kappa1, kappa2).
double c_star(const LatticeSpec& spec);

struct KernelMode {
  int m1 = 0, m2 = 0;  // k = (m1 kappa1, m2 kappa2)
  double value = 0.0;  // l_k(c*) or sigma*(k)
};

struct DispersionResult {
  double c_star = 0.0;
  std::vector<KernelMode> solutions;
  bool simple_kernel = false;
  std::vector<KernelMode> sigma_star_hits;
  std::vector<KernelMode> degenerate;  // vanishing sigma* denominator, reported not divided
  int kmax = 0;
  double sigma_margin = 0.0;
  double root_tol = 0.0;
};

struct ScanOptions {
  double sigma_margin = 1e-6;
  double root_tol = 1e-9;  // relative to g + sigma |kappa|^2
};

// Surface tension at which k joins the kernel at speed c*(sigma).
double sigma_star(int m1, int m2, const LatticeSpec& spec, bool* degenerate = nullptr);

DispersionResult kernel_scan(const LatticeSpec& spec, int kmax, const ScanOptions& opt = {});

}  // namespace lortz
