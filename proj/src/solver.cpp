#include "lortz/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"

namespace lortz {

// ---------------------------------------------------------------------------
// h and Q

BernoulliFunctionH BernoulliFunctionH::zero(double q0) {
  BernoulliFunctionH h;
  h.q0 = q0;
  return h;
}

BernoulliFunctionH BernoulliFunctionH::affine(double beta, double q0) {
  BernoulliFunctionH h;
  h.a = {0.0, beta};
  h.q0 = q0;
  h.beta = std::abs(beta);
  return h;
}

BernoulliFunctionH BernoulliFunctionH::polynomial(std::vector<double> coeffs, double q0) {
  BernoulliFunctionH h;
  h.a = std::move(coeffs);
  h.q0 = q0;
  for (double x : h.a) h.beta = std::max(h.beta, std::abs(x));
  return h;
}

double BernoulliFunctionH::operator()(double q) const {
  const double s = q - q0;
  double r = 0.0;
  for (size_t n = a.size(); n-- > 0;) r = r * s + a[n];
  return r;
}

double BernoulliFunctionH::prime(double q) const {
  const double s = q - q0;
  double r = 0.0;
  for (size_t n = a.size(); n-- > 1;) r = r * s + double(n) * a[n];
  return r;
}

double BernoulliFunctionH::Phi(double q, double lambda1) const {
  // h'(q) q = sum n a_n s^(n-1) (s + q0)
  const double s = q - q0;
  double r = 0.0, p = 1.0;
  for (size_t n = 1; n < a.size(); ++n) {
    p *= s;  // s^n
    r += double(n) * a[n] * (p * s / double(n + 1) + q0 * p / double(n));
  }
  return r / lambda1;
}

bool BernoulliFunctionH::is_zero() const {
  for (size_t n = 1; n < a.size(); ++n)
    if (a[n] != 0.0) return false;
  return true;
}

double Q_of_c(double c, const LatticeSpec& spec, const BernoulliFunctionH& h) {
  return 0.5 * c * c - h(spec.lambda1 / c);
}

double Q_prime(double c, const LatticeSpec& spec, const BernoulliFunctionH& h) {
  return c + spec.lambda1 * h.prime(spec.lambda1 / c) / (c * c);
}

SurfaceField eta_hat1(GridPtr g) {
  const double a = g->spec().kappa1(), b = g->spec().kappa2();
  return surface_from(g, [=](double x1, double x2) { return std::cos(a * x1) * std::cos(b * x2); }, Parity{1, 1});
}

void SolverOptions::tie_tolerances() {
  transport.tol = 1e-2 * picard_tol;
  divcurl.tol = 1e-2 * transport.tol;
}

namespace {

void note(const SolverOptions& opt, const std::string& s) {
  if (opt.log) opt.log(s);
}

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(3);
  o << x;
  return o.str();
}

SurfaceField nodal(const GridPtr& g, Parity p, const std::function<double(size_t)>& f) {
  SurfaceField r(g, p);
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = f(i);
  return r;
}

// (|u'|^2 + (grad eta . u')^2)/(2 rho^2) on the surface
SurfaceField kinetic_term(const VectorField& u, const FlatteningData& fd) {
  const SurfaceField u1 = level(u[0], 0), u2 = level(u[1], 0);
  const double d = fd.grid()->spec().d;
  const auto& ge = fd.grad_eta;
  return nodal(fd.grid(), Parity{1, 1}, [&](size_t i) {
    const double rho = 1.0 + fd.eta.v[i] / d;
    const double dot = ge[0].v[i] * u1.v[i] + ge[1].v[i] * u2.v[i];
    return (u1.v[i] * u1.v[i] + u2.v[i] * u2.v[i] + dot * dot) / (2.0 * rho * rho);
  });
}

SurfaceField static_terms(const FlatteningData& fd, double c, const BernoulliFunctionH& h) {
  const auto& s = fd.grid()->spec();
  const SurfaceField curv = curvature_term(fd.eta);
  const double Q = Q_of_c(c, s, h);
  return nodal(fd.grid(), Parity{1, 1}, [&](size_t i) { return s.g * fd.eta.v[i] + s.sigma * curv.v[i] - Q; });
}

SurfaceField mode_multiplier(const SurfaceField& f, const std::function<double(int, int)>& mult) {
  const Grid& g = *f.grid;
  Coefficients cf = coefficients(f);
  for (int m1 = -g.n1() / 2; m1 < g.n1() / 2; ++m1)
    for (int m2 = -g.n2() / 2; m2 < g.n2() / 2; ++m2) cf.at(m1, m2, 0) *= mult(m1, m2);
  return surface_from_coefficients(f.grid, cf, f.par);
}

}  // namespace

// ---------------------------------------------------------------------------
// Velocity

VectorField vorticity(const TimeFunctions& tf, const BernoulliFunctionH& h) {
  const GridPtr& g = tf.q.grid;
  if (h.is_zero()) return VectorField(g, SymmetryClass::minus);
  const double lam = g->spec().lambda1;
  ScalarField hq = map(tf.q, [&h](double q) { return h(q); });
  ScalarField ph = map(tf.q, [&h, lam](double q) { return h.Phi(q, lam); });
  hq.par = ph.par = Parity{1, 1};
  const VectorField gt = grad(tf.theta);
  VectorField A(g);
  for (int i = 0; i < 3; ++i) A[i] = mul(hq, gt[i], false);
  A[0] = A[0] + ph;
  VectorField w = curl(A);
  w.divergence_free = true;
  return w;
}

VectorField apply_T(const VectorField& u_ring, const FlatteningData& fd, double c, const BernoulliFunctionH& h,
                    const SolverOptions& opt, const VectorField* ufrak_eta) {
  const VectorField uf = ufrak_eta ? *ufrak_eta : ufrak(fd, opt.divcurl).f;
  const VectorField u = c * uf + u_ring;
  const TimeFunctions tf = compute_time_functions(u, fd, opt.transport);
  return invert_C(vorticity(tf, h), 0.0, fd, opt.divcurl).f;
}

VelocityState solve_velocity_fixed_point(const FlatteningData& fd, double c, const BernoulliFunctionH& h,
                                         const SolverOptions& opt, const VelocityState* warm) {
  VelocityState s;
  s.ufrak = ufrak(fd, opt.divcurl, warm ? &warm->ufrak : nullptr).f;
  if (h.is_zero()) {
    s.u = c * s.ufrak;
    s.tf = compute_time_functions(s.u, fd, opt.transport, warm ? &warm->tf : nullptr);
    s.iterations = 1;
    return s;
  }
  VectorField u = warm ? warm->u : c * s.ufrak;
  TimeFunctions tf;
  const TimeFunctions* wtf = warm ? &warm->tf : nullptr;
  double prev = 0.0;
  int growth = 0, stalls = 0;
  for (int it = 1; it <= opt.picard_max_iter; ++it) {
    tf = compute_time_functions(u, fd, opt.transport, wtf);
    wtf = &tf;
    DivCurlResult r = invert_C(vorticity(tf, h), c, fd, opt.divcurl, &u);
    const double upd = sup_diff(r.f, u) / std::max(sup(r.f), 1e-300);
    u = std::move(r.f);
    s.iterations = it;
    s.residual = upd;
    const bool floor = upd < 1e2 * opt.picard_tol;
    if (it > 1 && prev > 0.0) {
      const double ratio = upd / prev;
      if (!floor) s.contraction = std::max(s.contraction, ratio);
      growth = (ratio >= 1.0 && !floor) ? growth + 1 : 0;
      stalls = (floor && ratio > 0.9) ? stalls + 1 : 0;
    }
    if (!std::isfinite(upd) || growth >= 3)
      throw OutOfRegimeError("velocity fixed point: contraction factor >= 1, beta too large");
    prev = upd;
    if (upd < opt.picard_tol || stalls >= 3) break;
    if (it == opt.picard_max_iter && !floor)
      throw OutOfRegimeError("velocity fixed point: iteration cap reached with update " + fmt(upd));
  }
  s.u = std::move(u);
  s.tf = compute_time_functions(s.u, fd, opt.transport, &tf);
  return s;
}

// ---------------------------------------------------------------------------
// Boundary maps

SurfaceField curvature_term(const SurfaceField& eta) {
  const auto ge = grad(eta);
  SurfaceField n1 = ge[0], n2 = ge[1];
  for (size_t i = 0; i < eta.v.size(); ++i) {
    const double w = 1.0 / std::sqrt(1.0 + ge[0].v[i] * ge[0].v[i] + ge[1].v[i] * ge[1].v[i]);
    n1.v[i] *= w;
    n2.v[i] *= w;
  }
  SurfaceField r = -1.0 * (diff(n1, 1) + diff(n2, 2));
  r.par = eta.par;
  return r;
}

SurfaceField dynamic_residual(const VectorField& u, const TimeFunctions& tf, const FlatteningData& fd, double c,
                              const BernoulliFunctionH& h) {
  const SurfaceField kin = kinetic_term(u, fd);
  const SurfaceField st = static_terms(fd, c, h);
  const SurfaceField q = level(tf.q, 0);
  return nodal(fd.grid(), Parity{1, 1}, [&](size_t i) { return kin.v[i] + st.v[i] - h(q.v[i]); });
}

SurfaceField boundary_F(const FlatteningData& fd, double c, const BernoulliFunctionH& h, const SolverOptions& opt,
                        const VectorField* ufrak_eta) {
  const VectorField uf = ufrak_eta ? *ufrak_eta : ufrak(fd, opt.divcurl).f;
  return kinetic_term(c * uf, fd) + static_terms(fd, c, h);
}

SurfaceField boundary_R(const FlatteningData& fd, double c, const BernoulliFunctionH& h, const SolverOptions& opt,
                        const VelocityState* state) {
  VelocityState own;
  if (!state) {
    own = solve_velocity_fixed_point(fd, c, h, opt);
    state = &own;
  }
  const SurfaceField q = level(state->tf.q, 0);
  const SurfaceField kin = kinetic_term(state->u, fd), kin0 = kinetic_term(c * state->ufrak, fd);
  return nodal(fd.grid(), Parity{1, 1}, [&](size_t i) { return kin.v[i] - kin0.v[i] - h(q.v[i]); });
}

SurfaceField operator_L(double c, const SurfaceField& eta) {
  const LatticeSpec& s = eta.grid->spec();
  return mode_multiplier(eta, [&](int m1, int m2) { return ell(m1 * s.kappa1(), m2 * s.kappa2(), c, s); });
}

SurfaceField operator_L_inverse(double c, const SurfaceField& f, double kernel_tol) {
  const Grid& g = *f.grid;
  const LatticeSpec& s = g.spec();
  return mode_multiplier(f, [&](int m1, int m2) {
    if (2 * std::abs(m1) == g.n1() || 2 * std::abs(m2) == g.n2()) return 0.0;
    const double k1 = m1 * s.kappa1(), k2 = m2 * s.kappa2();
    const double l = ell(k1, k2, c, s);
    if (std::abs(l) < kernel_tol * (s.g + s.sigma * (k1 * k1 + k2 * k2))) return 0.0;
    return 1.0 / l;
  });
}

Projection projections_PQ(const SurfaceField& f) {
  Projection p;
  const SurfaceField e1 = eta_hat1(f.grid);
  p.coefficient = 4.0 * mean(mul(f, e1, false));
  p.P = p.coefficient * e1;
  p.Q = f - p.P;
  p.P.par = p.Q.par = f.par;
  return p;
}

// ---------------------------------------------------------------------------
// Lyapunov-Schmidt

EtaPerpState solve_eta_perp(GridPtr g, double t, double c, const BernoulliFunctionH& h, const SolverOptions& opt,
                            const EtaPerpState* warm) {
  const LatticeSpec& spec = g->spec();
  const double cs = c_star(spec);
  SolverOptions o = opt;
  if (o.transport.delta <= 0.0) o.transport.delta = o.delta_factor * cs;
  const SurfaceField e1 = eta_hat1(g);

  EtaPerpState st;
  SurfaceField perp = warm ? warm->eta_perp : SurfaceField(g, Parity{1, 1});
  VelocityState vel;
  bool have_vel = false;
  if (warm && warm->vel.u.grid()) {
    vel = warm->vel;
    have_vel = true;
  }
  double prev = 0.0;
  int stalls = 0, growth = 0;
  // at t = 0 the fixed point is eta_perp = 0; updates are then absolute
  const double scale = t == 0.0 ? 1.0 : std::abs(t);
  for (int it = 1; it <= o.eta_max_iter; ++it) {
    SurfaceField eta = t * e1 + perp;
    eta.par = Parity{1, 1};
    if (sup(eta) > o.epsilon_factor * spec.d)
      throw OutOfRegimeError("surface amplitude " + fmt(sup(eta)) + " exceeds epsilon d = " +
                             fmt(o.epsilon_factor * spec.d));
    const FlatteningData fd = build_flattening(eta);
    vel = solve_velocity_fixed_point(fd, c, h, o, have_vel ? &vel : nullptr);
    have_vel = true;
    const SurfaceField D = dynamic_residual(vel.u, vel.tf, fd, c, h);
    const Projection pr = projections_PQ(D);
    SurfaceField next = perp - operator_L_inverse(cs, pr.Q);
    // the filter keeps near-Nyquist modes from being pumped by aliased products
    dealias(next);
    next = symmetrize(next, Parity{1, 1});
    const double upd = sup_diff(next, perp) / scale;

    st.eta = eta;
    st.eta_perp = perp;
    st.D = D;
    st.K = pr.coefficient;
    st.q_residual = sup(pr.Q);
    st.iterations = it;
    note(o, "eta_perp sweep " + std::to_string(it) + ": update " + fmt(upd) + ", |QD| " + fmt(st.q_residual) +
                ", picard " + std::to_string(vel.iterations));
    const bool floor = upd < 1e2 * o.eta_tol;
    if (it > 1 && prev > 0.0) {
      const double ratio = upd / prev;
      if (!floor) st.contraction = std::max(st.contraction, ratio);
      growth = (ratio >= 1.0 && !floor) ? growth + 1 : 0;
      stalls = (floor && ratio > 0.9) ? stalls + 1 : 0;
    }
    if (!std::isfinite(upd) || growth >= 3)
      throw OutOfRegimeError("eta_perp iteration does not contract, (t, c) outside the neighbourhood U");
    prev = upd;
    if (upd < o.eta_tol || stalls >= 3) break;
    if (it == o.eta_max_iter && !floor)
      throw OutOfRegimeError("eta_perp iteration cap reached with update " + fmt(upd));
    perp = std::move(next);
  }
  st.vel = std::move(vel);
  return st;
}

NValue bifurcation_N(GridPtr g, double t, double c, const BernoulliFunctionH& h, const SolverOptions& opt,
                     const EtaPerpState* warm) {
  NValue n;
  if (t == 0.0) {
    const double s = opt.n0_step;
    const EtaPerpState p = solve_eta_perp(g, s, c, h, opt, warm);
    const EtaPerpState m = solve_eta_perp(g, -s, c, h, opt);
    n.K = 0.0;
    n.N = (p.K - m.K) / (2.0 * s);
    return n;
  }
  n.state = solve_eta_perp(g, t, c, h, opt, warm);
  n.K = n.state.K;
  n.N = n.K / t;
  return n;
}

// ---------------------------------------------------------------------------
// Residuals and branch

double FlattenedResiduals::max() const {
  return std::max({euler, divergence, time, time_boundary, integral, kinematic, dynamic});
}

FlattenedResiduals flattened_residuals(const SurfaceField& eta, const VectorField& u, const TimeFunctions& tf,
                                       double c, const BernoulliFunctionH& h) {
  const GridPtr& g = eta.grid;
  const Grid& G = *g;
  const FlatteningData fd = build_flattening(eta);
  FlattenedResiduals r;

  // Euler: curl(M u) = h'(q) grad q x (e1 q/lambda1 + grad theta)
  const double lam = G.spec().lambda1;
  const VectorField lhs = flattened_curl_operator(u, fd);
  const VectorField gq = grad(tf.q);
  VectorField b = grad(tf.theta);
  b[0] = b[0] + (1.0 / lam) * tf.q;
  ScalarField hp = map(tf.q, [&h](double q) { return h.prime(q); });
  VectorField rhs(g);
  for (int i = 0; i < 3; ++i) rhs[i] = ScalarField(g);
  for (size_t k = 0; k < tf.q.v.size(); ++k) {
    const double a0 = gq[0].v[k], a1 = gq[1].v[k], a2 = gq[2].v[k];
    const double b0 = b[0].v[k], b1 = b[1].v[k], b2 = b[2].v[k];
    rhs[0].v[k] = hp.v[k] * (a1 * b2 - a2 * b1);
    rhs[1].v[k] = hp.v[k] * (a2 * b0 - a0 * b2);
    rhs[2].v[k] = hp.v[k] * (a0 * b1 - a1 * b0);
  }
  r.euler = sup_diff(lhs, rhs);
  r.divergence = sup(div(u));

  const AffineVector ga = grad_affine(tf.q, tf.theta);
  double tr = 0.0;
  for (int j = 0; j < G.nz(); ++j)
    for (int i1 = 0; i1 < G.n1(); ++i1)
      for (int i2 = 0; i2 < G.n2(); ++i2) {
        const double x1 = G.x1()[i1];
        double s = -fd.rho.at(j, i1, i2);
        for (int i = 0; i < 3; ++i) s += u[i].at(j, i1, i2) * (ga.p0[i].at(j, i1, i2) + x1 * ga.p1[i].at(j, i1, i2));
        tr = std::max(tr, std::abs(s));
      }
  r.time = tr;
  double tb = 0.0, kin = 0.0;
  for (int j = 0; j < G.nz(); ++j)
    for (int i2 = 0; i2 < G.n2(); ++i2) tb = std::max(tb, std::abs(tf.tau.at(j, 0, i2)));
  for (int i1 = 0; i1 < G.n1(); ++i1)
    for (int i2 = 0; i2 < G.n2(); ++i2)
      kin = std::max({kin, std::abs(u[2].at(0, i1, i2)), std::abs(u[2].at(G.nz() - 1, i1, i2))});
  r.time_boundary = tb;
  r.kinematic = kin;
  r.integral = std::abs(mean(u[0]) / mean(fd.rho) - c);
  r.dynamic = sup(dynamic_residual(u, tf, fd, c, h));
  return r;
}

BranchPoint trivial_branch_point(GridPtr g, double c) {
  BranchPoint b;
  b.t = 0.0;
  b.c = c;
  b.eta = SurfaceField(g, Parity{1, 1});
  b.eta_perp = b.eta;
  b.u = constant_vector(g, c, 0, 0);
  b.tf = compute_time_functions(b.u, build_flattening(b.eta));
  return b;
}

namespace {

void finish_point(BranchPoint& b, const BernoulliFunctionH& h) {
  b.residuals = flattened_residuals(b.eta, b.u, b.tf, b.c, h);
  b.residual_euler = b.residuals.euler;
  b.residual_dynamic = b.residuals.dynamic;
  b.diamond_defect = std::max(check_diamond_periodicity(b.eta), check_diamond_periodicity(b.u));
  b.symmetry_defect =
      std::max(coefficient_symmetry_defect(b.eta, Parity{1, 1}), coefficient_symmetry_defect(b.u, SymmetryClass::plus));
}

}  // namespace

std::vector<BranchPoint> continue_branch(GridPtr g, const BernoulliFunctionH& h, const std::vector<double>& t_list,
                                         const SolverOptions& opt) {
  const LatticeSpec& spec = g->spec();
  const double cs = c_star(spec);
  const DispersionResult dr = kernel_scan(spec, opt.kernel_kmax);
  if (!dr.simple_kernel) throw OutOfRegimeError("kernel of L[c*] is not spanned by eta_1 (sigma near sigma*)");
  if (Q_prime(cs, spec, h) <= 0.0) throw ConfigError("Q'(c*) <= 0");
  SolverOptions o = opt;
  if (o.transport.delta <= 0.0) o.transport.delta = o.delta_factor * cs;

  std::vector<BranchPoint> out;
  double last_t = 0.0, last_c = cs;
  EtaPerpState warm_state;
  for (double t : t_list) {
    if (t == 0.0) {
      BranchPoint b = trivial_branch_point(g, cs);
      finish_point(b, h);
      out.push_back(std::move(b));
      continue;
    }
    const bool use_warm = last_t * t > 0.0;
    double c = cs;
    if (use_warm) c = cs + (last_c - cs) * (t / last_t) * (t / last_t);
    const EtaPerpState* w = use_warm ? &warm_state : nullptr;
    NValue n = bifurcation_N(g, t, c, h, o, w);
    int newton = 0;
    const double dc = o.newton_step * cs;
    double J = 0.0;
    while (std::abs(n.N) >= o.newton_tol) {
      if (++newton > o.newton_max_iter)
        throw NumericalError("Newton in c stalled at t = " + fmt(t) + " with |N| = " + fmt(std::abs(n.N)));
      if (J == 0.0) {
        const NValue np = bifurcation_N(g, t, c + dc, h, o, &n.state);
        J = (np.N - n.N) / dc;
        if (!(std::abs(J) > 0.0) || !std::isfinite(J)) throw NumericalError("Newton in c: singular slope");
      }
      c -= n.N / J;
      n = bifurcation_N(g, t, c, h, o, &n.state);
      note(o, "t = " + fmt(t) + ": Newton " + std::to_string(newton) + ", c = " + std::to_string(c) + ", |N| = " +
                  fmt(std::abs(n.N)));
    }
    BranchPoint b;
    b.t = t;
    b.c = c;
    b.eta = n.state.eta;
    b.eta_perp = n.state.eta_perp;
    b.u = n.state.vel.u;
    b.tf = n.state.vel.tf;
    b.residual_N = std::abs(n.N);
    b.picard_residual = n.state.vel.residual;
    b.picard_iterations = n.state.vel.iterations;
    b.eta_iterations = n.state.iterations;
    b.newton_iterations = newton;
    b.velocity_contraction = n.state.vel.contraction;
    b.eta_contraction = n.state.contraction;
    finish_point(b, h);
    warm_state = std::move(n.state);
    last_t = t;
    last_c = c;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace lortz
