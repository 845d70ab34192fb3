#pragma once

// Nonlinear solve for the flattened problem: the velocity fixed point
// u = c ufrak[eta] + u_ring with u_ring = T[u_ring, eta, c], the boundary
// maps F and R, the linearization L[c], the Lyapunov-Schmidt split
// eta = t eta_1 + eta_perp and Newton continuation in c.

#include <functional>
#include <string>
#include <vector>

#include "lortz/divcurl.hpp"
#include "lortz/transport.hpp"

namespace lortz {

// h(q) = sum_n a[n] (q - q0)^n
struct BernoulliFunctionH {
  std::vector<double> a;
  double q0 = 0.0;
  double beta = 0.0;  // reported smallness parameter

  static BernoulliFunctionH zero(double q0 = 0.0);
  // h = beta (q - q0)
  static BernoulliFunctionH affine(double beta, double q0);
  static BernoulliFunctionH polynomial(std::vector<double> coeffs, double q0);

  double operator()(double q) const;
  double prime(double q) const;
  // Phi with Phi' = h'(q) q / lambda1 and Phi(q0) = 0.
  double Phi(double q, double lambda1) const;
  bool is_zero() const;
};

// Q(c) = c^2/2 - h(lambda1/c) and its derivative.
double Q_of_c(double c, const LatticeSpec& spec, const BernoulliFunctionH& h);
double Q_prime(double c, const LatticeSpec& spec, const BernoulliFunctionH& h);

// eta_1 = cos(kappa1 x1) cos(kappa2 x2)
SurfaceField eta_hat1(GridPtr g);

struct SolverOptions {
  TransportOptions transport;
  DivCurlOptions divcurl;
  double picard_tol = 1e-11;   // relative velocity update
  int picard_max_iter = 60;
  double eta_tol = 1e-11;      // eta_perp update relative to max(|t|, 1e-300)
  int eta_max_iter = 80;
  double newton_tol = 1e-10;   // |N|
  int newton_max_iter = 20;
  double newton_step = 1e-6;   // FD step for dN/dc, relative to c*
  double n0_step = 1e-4;       // FD step in t for N[0, c]
  double delta_factor = 0.1;   // delta = delta_factor c*
  double epsilon_factor = 0.05;  // sup |eta| <= epsilon_factor d
  int kernel_kmax = 10;
  std::function<void(const std::string&)> log;

  // Inner tolerances tied to the outer one: div-curl = 0.01 transport = 1e-4 Picard.
  void tie_tolerances();
};

// h'(q) grad q x grad tau, assembled as curl(h(q) grad theta + Phi(q) e1).
VectorField vorticity(const TimeFunctions& tf, const BernoulliFunctionH& h);

struct VelocityState {
  VectorField u;       // c ufrak[eta] + u_ring
  VectorField ufrak;   // ufrak[eta]
  TimeFunctions tf;
  int iterations = 0;
  double contraction = 0.0;
  double residual = 0.0;  // last relative update |u_{k+1} - u_k| / |u|
  VectorField u_ring(double c) const { return u - c * ufrak; }
};

// T[u_ring, eta, c] = S[eta](h'(q) grad q x grad tau) at u = c ufrak[eta] + u_ring.
VectorField apply_T(const VectorField& u_ring, const FlatteningData& fd, double c, const BernoulliFunctionH& h,
                    const SolverOptions& opt = {}, const VectorField* ufrak_eta = nullptr);

// Banach iteration for u_ring. Throws OutOfRegimeError when the observed
// contraction factor reaches 1 (beta too large) or u1 <= delta.
VelocityState solve_velocity_fixed_point(const FlatteningData& fd, double c, const BernoulliFunctionH& h,
                                         const SolverOptions& opt = {}, const VelocityState* warm = nullptr);

// div n[eta] = -div'(grad eta / sqrt(1 + |grad eta|^2))
SurfaceField curvature_term(const SurfaceField& eta);

// Left-hand side minus Q(c) of the dynamic condition for a given velocity and
// time functions, on the surface x3 = 0.
SurfaceField dynamic_residual(const VectorField& u, const TimeFunctions& tf, const FlatteningData& fd, double c,
                              const BernoulliFunctionH& h);

SurfaceField boundary_F(const FlatteningData& fd, double c, const BernoulliFunctionH& h, const SolverOptions& opt = {},
                        const VectorField* ufrak_eta = nullptr);
SurfaceField boundary_R(const FlatteningData& fd, double c, const BernoulliFunctionH& h, const SolverOptions& opt = {},
                        const VelocityState* state = nullptr);

// L[c]: multiplication by l_k(c) on Fourier coefficients.
SurfaceField operator_L(double c, const SurfaceField& eta);
// L[c]^{-1} on modes outside the kernel; kernel and Nyquist modes are set to zero.
SurfaceField operator_L_inverse(double c, const SurfaceField& f, double kernel_tol = 1e-9);

struct Projection {
  double coefficient = 0.0;  // P f = coefficient * eta_1
  SurfaceField P, Q;
};
Projection projections_PQ(const SurfaceField& f);

struct EtaPerpState {
  SurfaceField eta_perp;
  SurfaceField eta;
  SurfaceField D;       // F + R at eta
  VelocityState vel;
  double K = 0.0;       // eta_1 coefficient of P(F + R)
  double q_residual = 0.0;  // sup |Q(F + R)|
  int iterations = 0;
  double contraction = 0.0;
};

// Joint iteration eta_perp <- eta_perp - L[c*]^{-1} Q(F + R) with the velocity
// fixed point warm-started from the previous sweep.
EtaPerpState solve_eta_perp(GridPtr g, double t, double c, const BernoulliFunctionH& h, const SolverOptions& opt = {},
                            const EtaPerpState* warm = nullptr);

struct NValue {
  double N = 0.0;
  double K = 0.0;
  EtaPerpState state;  // empty for t = 0
};
// N[t, c] = K[t, c]/t; at t = 0 the central difference of K with step opt.n0_step.
NValue bifurcation_N(GridPtr g, double t, double c, const BernoulliFunctionH& h, const SolverOptions& opt = {},
                     const EtaPerpState* warm = nullptr);

struct FlattenedResiduals {
  double euler = 0.0;       // curl(M u) - h'(q) grad q x grad tau
  double divergence = 0.0;
  double time = 0.0;        // u.grad tau - rho
  double time_boundary = 0.0;  // tau on x1 = 0
  double integral = 0.0;    // mean(u1)/mean(rho) - c
  double kinematic = 0.0;   // u3 on both planes
  double dynamic = 0.0;
  double max() const;
};
FlattenedResiduals flattened_residuals(const SurfaceField& eta, const VectorField& u, const TimeFunctions& tf,
                                       double c, const BernoulliFunctionH& h);

struct BranchPoint {
  double t = 0.0;
  double c = 0.0;
  SurfaceField eta, eta_perp;
  VectorField u;
  TimeFunctions tf;
  FlattenedResiduals residuals;
  double residual_euler = 0.0, residual_dynamic = 0.0, residual_N = 0.0;
  double picard_residual = 0.0;
  int picard_iterations = 0, eta_iterations = 0, newton_iterations = 0;
  double velocity_contraction = 0.0, eta_contraction = 0.0;
  double diamond_defect = 0.0, symmetry_defect = 0.0;
};

// Trivial state (c*, 0, c* e1).
BranchPoint trivial_branch_point(GridPtr g, double c);

// For each t: Newton in c on N[t, c] = 0 starting at c* (chord iteration with
// the finite-difference slope from the first step).
std::vector<BranchPoint> continue_branch(GridPtr g, const BernoulliFunctionH& h, const std::vector<double>& t_list,
                                         const SolverOptions& opt = {});

}  // namespace lortz
