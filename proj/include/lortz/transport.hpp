#pragma once

// Steady transport u.grad g = f with g = 0 on the plane x1 = 0, for u with
// u1 > delta. Solutions are stored as g = x1 G/lambda1 + theta with G and
// theta Lambda-periodic; G = g(. + lambda1 e1) - g is the period function.
//
// Two methods:
//  - characteristics: backward tracing of every grid node with an embedded
//    Dormand-Prince 5(4) pair, trajectories starting on one x1-plane share
//    step control;
//  - spectral: fixed-point sweeps for (G, theta) on the periodic grid,
//      G     = lambda1 <s - v.grad' theta>_1 - d1^{-1}(v.grad' G)~
//      theta = d1^{-1}(s - G/lambda1 - v.grad' theta)~
//    with v = (u2, u3)/u1, s = f/u1 and ~ the x1-mean-free part. Valid for
//    (+)-symmetric u, where the x1-mean of v.grad' G vanishes by parity.

#include <string>
#include <vector>

#include "lortz/flattening.hpp"

namespace lortz {

enum class TransportMethod { spectral, characteristics };
std::string to_string(TransportMethod m);
TransportMethod transport_method_from_string(const std::string& s);

struct TransportOptions {
  TransportMethod method = TransportMethod::spectral;
  double delta = 0.0;      // required lower bound on u1 (> 0 enforced as u1 > delta)
  double tol = 1e-14;      // spectral: relative sweep update
  int max_iter = 200;      // spectral sweeps
  double rtol = 1e-10;     // characteristics
  double atol = 1e-13;
  int max_steps = 100000;  // per trajectory segment
};

struct FlowTrace {
  double t_start = 0.0;
  double y2 = 0.0, y3 = 0.0;          // start point on the plane x1 = t_start
  std::vector<double> t, x2, x3;      // accepted samples, first is the start point
  double last_step = 0.0;
  double error_estimate = 0.0;        // largest accepted local error norm
  int steps = 0;
};

// Solution of dy/dt = (u2/u1, u3/u1)(t, y) from t_start to t_end (either direction).
FlowTrace trace_flow(const VectorField& u, double t_start, double x2, double x3, double t_end,
                     const TransportOptions& opt = {});

struct TransportSolution {
  ScalarField G;      // period function, Lambda-periodic
  ScalarField theta;  // periodic remainder
  ScalarField value;  // nodal values of g on the grid (not periodic in x1)
  int iterations = 0;
  double contraction = 0.0;
  int steps = 0;      // characteristics: accepted steps summed over groups
};

// Right-hand side f0 + x1 f1 with f0, f1 Lambda-periodic (f1 may be empty).
struct AffineRHS {
  ScalarField f0;
  ScalarField f1;
};

TransportSolution solve_transport(const VectorField& u, const ScalarField& f, const TransportOptions& opt = {});
// Characteristics only.
TransportSolution solve_transport_affine(const VectorField& u, const AffineRHS& f, const TransportOptions& opt = {});

struct TimeFunctions {
  ScalarField tau;    // nodal values, tau = 0 on x1 = 0
  ScalarField q;      // tau(. + lambda1 e1) - tau
  ScalarField theta;  // tau - x1 q / lambda1
  int iterations = 0;
  double contraction = 0.0;
};

// u.grad tau = rho with rho = 1 + eta/d.
TimeFunctions compute_time_functions(const VectorField& u, const FlatteningData& fd, const TransportOptions& opt = {},
                                     const TimeFunctions* warm = nullptr);

// grad tau = e1 q/lambda1 + x1 grad q/lambda1 + grad theta, split into the
// periodic part and the coefficient of x1.
struct AffineVector {
  VectorField p0, p1;
};
AffineVector grad_affine(const ScalarField& G, const ScalarField& theta);

// grad q x grad tau = grad q x (e1 q/lambda1 + grad theta)
VectorField grad_q_cross_grad_tau(const TimeFunctions& tf);

// Off-grid value of g = x1 G/lambda1 + theta.
double eval_affine(const ScalarField& G, const ScalarField& theta, double x1, double x2, double x3);

struct TransportDerivativeReport {
  double delta_norm = 0.0;     // |g[u+v] - g[u]|
  double linear_error = 0.0;   // |g[u+v] - g[u] - d_u g v|
  double half_error = 0.0;     // the same with v/2; ~ linear_error/4 if quadratic
  double quadratic_ratio = 0.0;
  double low_mode_error = 0.0;   // error seminorm on |m| <= 2
  double high_mode_error = 0.0;  // |k|-weighted error seminorm on the remaining modes
  // At the trivial solution u = c e1 (only filled when u is uniform):
  double tau_u_closed_form = -1.0;  // |FD d_u tau - (-(1/c^2) int_0^x1 v1)|
};

// FD check of d_u g[u,f]v = -g[u, v.grad g[u,f]] by characteristics.
TransportDerivativeReport transport_derivatives_check(const VectorField& u, const ScalarField& f, const VectorField& v,
                                                      const TransportOptions& opt = {});

struct QIdentityReport {
  double residual = 0.0;        // sup |c d_u q[c e1, 0] D ufrak[0] eta_dot + d_eta q[c e1, 0] eta_dot|
  double du_term = 0.0;         // sup of the first term
  double deta_term = 0.0;       // sup of the second term
  double deta_closed_form = 0.0;  // |FD d_eta tau - (1/(cd)) int_0^x1 eta_dot|
};

// Central differences with step eps around the trivial state; uses the
// characteristics method when opt.method says so.
QIdentityReport q_derivative_identity(double c, const SurfaceField& eta_dot, double eps,
                                      const TransportOptions& opt = {});

}  // namespace lortz
