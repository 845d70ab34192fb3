#pragma once

// The div-curl operator C[eta] f = (curl(M f), mean of f1) with
// M = (1/rho) J^T J, its exact inverse at eta = 0 and the Neumann iteration
// for small eta.

#include <array>
#include <functional>
#include <vector>

#include "lortz/flattening.hpp"

namespace lortz {

struct CurlMean {
  VectorField g;
  double c = 0.0;
};

struct DivCurlOptions {
  double tol = 1e-13;   // relative update norm at which the iteration stops
  int max_iter = 200;
  // Called once per iteration with (iteration, update norm, contraction ratio).
  std::function<void(int, double, double)> log;
};

struct DivCurlResult {
  VectorField f;
  int iterations = 0;
  double contraction = 0.0;  // largest observed ratio of successive updates
  double update_norm = 0.0;
};

// Throws ConfigError if f3 does not vanish on the boundary planes.
CurlMean apply_C(const VectorField& f, const FlatteningData& fd, double bc_tol = 1e-9);

// Solves C[0] f = (g, c). Per horizontal mode: (D^2 - |k|^2) f3 = -(curl g)_3 with
// f3 = 0 at both planes, then f1, f2 from the third curl component and the
// divergence. The k = 0 mode integrates D f1 = g2, -D f2 = g1 with the mean
// condition. Throws NumericalError if a vertical solve fails.
VectorField invert_C0(const VectorField& g, double c);

// Neumann iteration f <- f + C[0]^{-1}((g, c) - C[eta] f). Throws
// OutOfRegimeError when the updates stop contracting or the cap is reached.
DivCurlResult invert_C(const VectorField& g, double c, const FlatteningData& fd,
                       const DivCurlOptions& opt = {}, const VectorField* warm = nullptr);

// ufrak[eta] = C[eta]^{-1}(0, 1)
DivCurlResult ufrak(const FlatteningData& fd, const DivCurlOptions& opt = {}, const VectorField* warm = nullptr);

// Vertical profile cosh(k(z+d))/(k sinh(kd)) and its first derivative.
double frak_f(double k, double z, double d);
double frak_fp(double k, double z, double d);

// chi[eta_dot] = sum_{k != 0} f_{|k|}(x3) eta_dot_k e^{ik.x'}
ScalarField chi(const SurfaceField& eta_dot);

// D ufrak[0] eta_dot = (eta_dot/d, 0, -d1 pi[eta_dot]) + grad d1 chi[eta_dot]
VectorField D_ufrak0(const SurfaceField& eta_dot);

using MatrixField = std::array<std::array<ScalarField, 3>, 3>;
// B[eta_dot] = 2 e3 (.) grad pi[eta_dot] - (eta_dot/d) I
MatrixField B_form(const SurfaceField& eta_dot);
VectorField apply_matrix(const MatrixField& B, const VectorField& f, bool dealias = true);

}  // namespace lortz
