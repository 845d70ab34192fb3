#pragma once

// Closed-form coefficients of the small-amplitude expansion
//   u = c e1 + t u1 + t^2 u2 + ..., eta = t eta1 + t^2 eta2 + ...,
//   tau = x1/c + t tau1 + ..., q = lambda1/c + t^2 q2 + ...
// evaluated on the grid from trigonometric times cosh profiles. Nothing in
// here calls the nonlinear solver; the fields are the oracle it is checked
// against.

#include <array>
#include <string>

#include "lortz/divcurl.hpp"
#include "lortz/solver.hpp"

namespace lortz {

// Vertical profile f_k(z) = cosh(k(z+d))/(k sinh(kd)) and derivative.
struct CoshProfile {
  double k = 0.0, d = 1.0;
  double f(double z) const;
  double fp(double z) const;
  double fbar() const { return f(0.0); }
};

struct FirstOrderFields {
  ScalarField phi1;  // c d1 eta1 f_|kappa|
  VectorField u1;    // c (eta1/d e1 - d1 pi[eta1] e3) + grad phi1
  ScalarField tau1;  // -phi1/c^2
  double q1 = 0.0, U1 = 0.0;
};
FirstOrderFields first_order_fields(GridPtr g, double c);

// K(x2, x3) = |k|^2 f^2 + f'^2 + ((k1^2 - k2^2) f^2 + f'^2) cos(2 k2 x2)
double K_profile(const LatticeSpec& s, double x2, double x3);
double K_profile_dx3(const LatticeSpec& s, double x2, double x3);
// K at cos(2 k2 x2) = +1 and -1.
double K_plus(const LatticeSpec& s, double x3);
double K_minus(const LatticeSpec& s, double x3);

struct Q2Data {
  ScalarField q2;
  double U2 = 0.0;      // c k1^2 fbar/(4d)
  double q0 = 0.0;      // lambda1/c
  double Qprime = 0.0;  // c + lambda1 h'(lambda1/c)/c^2
  double hprime0 = 0.0;
};
// Throws ConfigError when Q'(c) <= 0.
Q2Data q2_field(GridPtr g, double c, const BernoulliFunctionH& h);

// Q'(c) q2 = (pi k1/2) K(x2, x3) - q0 U2, i.e. q2 = qfrak(K) with
// qfrak(K) = pi k1/(2 Q'(c)) (K - fbar/d).
double qfrak(const LatticeSpec& s, double c, const BernoulliFunctionH& h, double K);
double q2_value(const LatticeSpec& s, double c, const BernoulliFunctionH& h, double x2, double x3);
double q2_dx3(const LatticeSpec& s, double c, const BernoulliFunctionH& h, double x2, double x3);

// Amplitudes of the four modes 1, cos(2k1x1), cos(2k2x2), cos(2k1x1)cos(2k2x2).
using CosModes = std::array<double, 4>;

struct Eta2Profile {
  SurfaceField eta2;
  CosModes a{};    // a_0, a_{2k1 e1}, a_{2k2 e2}, a_{2k}
  CosModes ell{};  // l_k(c) at the same modes
  CosModes amp{};  // eta2 = sum amp[i] * mode i
};
// Throws OutOfRegimeError naming the mode when |l_k(c)| < tol (g + sigma |k|^2).
Eta2Profile eta2_profile(GridPtr g, double c, double resonance_tol = 1e-9);

struct Phi2Alpha1 {
  ScalarField phi2;
  SurfaceField alpha1;
  CosModes alpha_amp{};
};
// With eta1 scaled by `amplitude` (eta2 must be scaled by amplitude^2 by the caller).
Phi2Alpha1 phi2_alpha1(GridPtr g, double c, const Eta2Profile& eta2, double amplitude = 1.0);

// omega2 = (h'(q0)/c)(d3 q2 e2 - d2 q2 e3)
VectorField vorticity2(GridPtr g, double c, const BernoulliFunctionH& h);

// B[eta1] = e3 (x) grad pi + grad pi (x) e3 - (eta1/d) I and
// M[eta1] = (grad' pi (x) grad' pi + eta1^2/d^2 I_2) (+) 0, closed form.
MatrixField B_closed(GridPtr g);
MatrixField M_closed(GridPtr g);

struct ExpansionData {
  double c = 0.0;
  double q0 = 0.0, Qprime = 0.0, hprime0 = 0.0;
  double q1 = 0.0, U1 = 0.0, U2 = 0.0;
  SurfaceField eta1;
  FirstOrderFields first;
  ScalarField q2;
  Eta2Profile eta2;
  Phi2Alpha1 second;
  VectorField omega2;
};
ExpansionData expand(GridPtr g, double c, const BernoulliFunctionH& h);

// Invariants, as sup-norm defects.
// |B[eta1] u1 + M[eta1] c e1 - B[eta1] grad phi1|
double BM_identity_defect(GridPtr g, double c);
// |grad phi1|^2/2 on x3 = 0 against its trigonometric expansion
double grad_phi1_display_defect(GridPtr g, double c);
// Order-t part of the dynamic condition, c u1_1 - (c^2/d) eta1 + g eta1 - sigma lap eta1.
SurfaceField first_order_dynamic_residual(GridPtr g, double c);
// U2 from the grid mean of the second-order integral condition.
double U2_quadrature(GridPtr g, double c, const BernoulliFunctionH& h);

}  // namespace lortz
