#include "lortz/transport.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>

#include "lortz/divcurl.hpp"
#include "lortz/errors.hpp"
#include "lortz/parallel.hpp"

namespace lortz {

std::string to_string(TransportMethod m) { return m == TransportMethod::spectral ? "spectral" : "characteristics"; }

TransportMethod transport_method_from_string(const std::string& s) {
  if (s == "spectral") return TransportMethod::spectral;
  if (s == "characteristics") return TransportMethod::characteristics;
  throw ConfigError("unknown transport method '" + s + "'");
}

namespace {

void check_definite(const VectorField& u, double delta) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : u[0].v) m = std::min(m, x);
  if (!(m > delta) || !(m > 0.0))
    throw OutOfRegimeError("transport: u1 = " + std::to_string(m) + " is not above delta = " + std::to_string(delta));
}

// Dormand-Prince 5(4) with FSAL. rhs(t, y, k) for a stacked state of any size.
using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

struct StepStats {
  int steps = 0;
  double max_err = 0.0;
  double last_h = 0.0;
};

constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

// Integrates y from t0 to t1; h carries the step size between calls.
// on_step(t, y) is called after every accepted step.
void dp45(const Rhs& f, double t0, double t1, std::vector<double>& y, double& h, const TransportOptions& opt,
          StepStats& st, const std::function<void(double, const std::vector<double>&)>& on_step = {}) {
  const double span = t1 - t0;
  if (span == 0.0) return;
  const double dir = span > 0 ? 1.0 : -1.0;
  const size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), yn(n);
  h = dir * std::min(std::abs(h), std::abs(span));
  double t = t0;
  f(t, y, k1);
  int count = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++count > opt.max_steps) throw NumericalError("transport: step limit reached");
    bool last = false;
    if (dir * (t + h - t1) >= 0.0) {
      h = t1 - t;
      last = true;
    }
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + h * A21 * k1[i];
    f(t + h / 5, yt, k2);
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    f(t + 3 * h / 10, yt, k3);
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    f(t + 4 * h / 5, yt, k4);
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    f(t + 8 * h / 9, yt, k5);
    for (size_t i = 0; i < n; ++i)
      yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    f(t + h, yt, k6);
    for (size_t i = 0; i < n; ++i)
      yn[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    const double tn = last ? t1 : t + h;
    f(tn, yn, k7);
    double err = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err)) throw NumericalError("transport: non-finite integrator state");
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      t = tn;
      y.swap(yn);
      k1.swap(k7);
      ++st.steps;
      st.max_err = std::max(st.max_err, err);
      st.last_h = h;
      if (on_step) on_step(t, y);
      if (last) break;
      h *= fac;
    } else {
      h *= std::min(fac, 0.9);
      if (std::abs(h) < 1e-14 * std::abs(span)) throw NumericalError("transport: step size underflow");
    }
  }
}

struct Characteristics {
  GridPtr grid;
  FieldEvaluator ev;
  bool affine = false;
  double delta = 0.0;
};

// Right-hand side for m trajectories, state (y2, y3, I) each.
Rhs make_rhs(const Characteristics& ch, FieldEvaluator::Slice& sl) {
  return [&ch, &sl](double t, const std::vector<double>& y, std::vector<double>& k) {
    ch.ev.slice(t, sl);
    const double d = ch.grid->spec().d;
    const size_t m = y.size() / 3;
    double buf[5];
    for (size_t p = 0; p < m; ++p) {
      const double y3 = std::clamp(y[3 * p + 1], -d, 0.0);
      sl.eval(y[3 * p], y3, buf);
      const double u1 = buf[0];
      if (!(u1 > ch.delta) || !(u1 > 0.0))
        throw OutOfRegimeError("transport: u1 = " + std::to_string(u1) + " on a characteristic");
      k[3 * p] = buf[1] / u1;
      k[3 * p + 1] = buf[2] / u1;
      k[3 * p + 2] = (buf[3] + (ch.affine ? t * buf[4] : 0.0)) / u1;
    }
  };
}

// Traces every node of every x1-plane backward; per plane the trajectories
// share one step-size sequence.
TransportSolution characteristics(const VectorField& u, const ScalarField& f0, const ScalarField* f1,
                                  const TransportOptions& opt) {
  check_definite(u, opt.delta);
  const GridPtr& gp = u.grid();
  const Grid& g = *gp;
  Characteristics ch;
  ch.grid = gp;
  ch.affine = f1 != nullptr;
  ch.delta = opt.delta;
  std::vector<const ScalarField*> fields = {&u[0], &u[1], &u[2], &f0};
  if (f1) fields.push_back(f1);
  ch.ev = FieldEvaluator(fields);

  TransportSolution out;
  out.G = ScalarField(gp);
  out.theta = ScalarField(gp);
  out.value = ScalarField(gp);
  const int n1 = g.n1(), n2 = g.n2(), nz = g.nz();
  const double lam = g.spec().lambda1;
  std::atomic<int> steps{0};

  parallel_for(n1, [&](int i1) {
    const double a = g.x1()[i1];
    FieldEvaluator::Slice sl;
    Rhs rhs = make_rhs(ch, sl);
    const int m = n2 * nz;
    std::vector<double> y(3 * size_t(m));
    for (int j = 0; j < nz; ++j)
      for (int i2 = 0; i2 < n2; ++i2) {
        const int p = j * n2 + i2;
        y[3 * p] = g.x2()[i2];
        y[3 * p + 1] = g.z()[j];
        y[3 * p + 2] = 0.0;
      }
    StepStats st;
    double h = lam / n1;
    dp45(rhs, a, 0.0, y, h, opt, st);
    std::vector<double> gv(m);
    for (int p = 0; p < m; ++p) gv[p] = -y[3 * p + 2];
    if (!ch.affine) {
      dp45(rhs, 0.0, a - lam, y, h, opt, st);
      for (int j = 0; j < nz; ++j)
        for (int i2 = 0; i2 < n2; ++i2) {
          const int p = j * n2 + i2;
          const double G = -y[3 * p + 2];
          out.G.at(j, i1, i2) = G;
          out.theta.at(j, i1, i2) = gv[p] - a * G / lam;
        }
    }
    for (int j = 0; j < nz; ++j)
      for (int i2 = 0; i2 < n2; ++i2) out.value.at(j, i1, i2) = gv[j * n2 + i2];
    steps += st.steps;
  });
  out.iterations = 1;
  out.steps = steps;
  if (!ch.affine && u.symmetry() == SymmetryClass::plus && f0.par == Parity{1, 1}) {
    out.G.par = Parity{1, 1};
    out.theta.par = Parity{-1, 1};
    out.value.par = Parity{-1, 1};
  }
  return out;
}

bool spectral_applicable(const VectorField& u, const ScalarField& f) {
  return u.symmetry() == SymmetryClass::plus && f.par == Parity{1, 1};
}

TransportSolution spectral(const VectorField& u, const ScalarField& f, const TransportOptions& opt,
                           const ScalarField* warm_G, const ScalarField* warm_theta) {
  check_definite(u, opt.delta);
  const GridPtr& gp = u.grid();
  const double lam = gp->spec().lambda1;
  ScalarField inv_u1 = map(u[0], [](double x) { return 1.0 / x; });
  inv_u1.par = Parity{1, 1};
  // Products are not filtered: the 2/3 rule would cap the resolved modes of
  // G and theta well below the grid resolution.
  const ScalarField s = mul(f, inv_u1, false);
  const ScalarField v2 = mul(u[1], inv_u1, false);
  const ScalarField v3 = mul(u[2], inv_u1, false);
  auto transport_part = [&](const ScalarField& a) {
    return mul(v2, diff(a, 2), false) + mul(v3, diff(a, 3), false);
  };

  const Parity pG{1, 1}, pT{-1, 1};
  ScalarField G = warm_G ? *warm_G : ScalarField(gp, pG);
  ScalarField th = warm_theta ? *warm_theta : ScalarField(gp, pT);
  TransportSolution out;
  double prev = 0.0, first = 0.0;
  int stalls = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const ScalarField w = transport_part(th);
    const ScalarField a = transport_part(G);
    ScalarField Gn = lam * mean_x1(s - w) - integrate_x1(a);
    Gn = symmetrize(Gn, pG);
    ScalarField thn = integrate_x1(s - (1.0 / lam) * Gn - w);
    thn = symmetrize(thn, pT);
    const double scale = std::max({sup(Gn), sup(thn), 1e-300});
    const double upd = std::max(sup_diff(Gn, G), sup_diff(thn, th)) / scale;
    G = std::move(Gn);
    th = std::move(thn);
    out.iterations = it;
    if (!std::isfinite(upd)) throw OutOfRegimeError("transport: spectral sweep diverged");
    if (it == 1) first = upd;
    if (it > 1 && prev > 0.0) {
      const double r = upd / prev;
      if (prev > 1e3 * opt.tol) out.contraction = std::max(out.contraction, r);
      stalls = (r > 0.95 && upd < 1e2 * opt.tol) ? stalls + 1 : 0;
    }
    if (upd > 1e3 * std::max(first, 1e-300) && it > 3) throw OutOfRegimeError("transport: spectral sweep diverged");
    prev = upd;
    if (upd <= opt.tol || stalls >= 3) break;
    if (it == opt.max_iter && upd > 1e2 * opt.tol)
      throw OutOfRegimeError("transport: spectral sweep did not converge (update " + std::to_string(upd) + ")");
  }
  const ScalarField x1 = scalar_from(gp, [](double x, double, double) { return x; });
  out.value = mul(x1, (1.0 / lam) * G, false) + th;
  out.value.par = pT;
  out.G = std::move(G);
  out.theta = std::move(th);
  return out;
}

TransportSolution dispatch(const VectorField& u, const ScalarField& f, const TransportOptions& opt,
                           const ScalarField* wG, const ScalarField* wT) {
  if (opt.method == TransportMethod::spectral && spectral_applicable(u, f)) return spectral(u, f, opt, wG, wT);
  return characteristics(u, f, nullptr, opt);
}

}  // namespace

FlowTrace trace_flow(const VectorField& u, double t_start, double x2, double x3, double t_end,
                     const TransportOptions& opt) {
  Characteristics ch;
  ch.grid = u.grid();
  ch.delta = opt.delta;
  ScalarField zero(u.grid(), Parity{1, 1});
  ch.ev = FieldEvaluator({&u[0], &u[1], &u[2], &zero});
  FieldEvaluator::Slice sl;
  Rhs rhs = make_rhs(ch, sl);
  FlowTrace tr;
  tr.t_start = t_start;
  tr.y2 = x2;
  tr.y3 = x3;
  tr.t.push_back(t_start);
  tr.x2.push_back(x2);
  tr.x3.push_back(x3);
  std::vector<double> y = {x2, x3, 0.0};
  StepStats st;
  double h = u.grid()->spec().lambda1 / u.grid()->n1();
  dp45(rhs, t_start, t_end, y, h, opt, st, [&tr](double t, const std::vector<double>& s) {
    tr.t.push_back(t);
    tr.x2.push_back(s[0]);
    tr.x3.push_back(s[1]);
  });
  tr.last_step = st.last_h;
  tr.error_estimate = st.max_err;
  tr.steps = st.steps;
  return tr;
}

TransportSolution solve_transport(const VectorField& u, const ScalarField& f, const TransportOptions& opt) {
  return dispatch(u, f, opt, nullptr, nullptr);
}

TransportSolution solve_transport_affine(const VectorField& u, const AffineRHS& f, const TransportOptions& opt) {
  return characteristics(u, f.f0, f.f1.v.empty() ? nullptr : &f.f1, opt);
}

TimeFunctions compute_time_functions(const VectorField& u, const FlatteningData& fd, const TransportOptions& opt,
                                     const TimeFunctions* warm) {
  const ScalarField* wG = warm ? &warm->q : nullptr;
  const ScalarField* wT = warm ? &warm->theta : nullptr;
  auto s = dispatch(u, fd.rho, opt, wG, wT);
  TimeFunctions tf;
  tf.tau = std::move(s.value);
  tf.q = std::move(s.G);
  tf.theta = std::move(s.theta);
  tf.iterations = s.iterations;
  tf.contraction = s.contraction;
  return tf;
}

AffineVector grad_affine(const ScalarField& G, const ScalarField& theta) {
  const double lam = G.grid->spec().lambda1;
  AffineVector a;
  VectorField gt = grad(theta);
  a.p0 = VectorField(G.grid);
  a.p0[0] = (1.0 / lam) * G + gt[0];
  a.p0[1] = gt[1];
  a.p0[2] = gt[2];
  a.p1 = (1.0 / lam) * grad(G);
  return a;
}

VectorField grad_q_cross_grad_tau(const TimeFunctions& tf) {
  const double lam = tf.q.grid->spec().lambda1;
  const VectorField a = grad(tf.q);
  VectorField b = grad(tf.theta);
  b[0] = b[0] + (1.0 / lam) * tf.q;
  VectorField r(tf.q.grid);
  r[0] = mul(a[1], b[2]) - mul(a[2], b[1]);
  r[1] = mul(a[2], b[0]) - mul(a[0], b[2]);
  r[2] = mul(a[0], b[1]) - mul(a[1], b[0]);
  return r;
}

double eval_affine(const ScalarField& G, const ScalarField& theta, double x1, double x2, double x3) {
  FieldEvaluator ev({&G, &theta});
  double o[2];
  ev.eval(x1, x2, x3, o);
  return x1 * o[0] / G.grid->spec().lambda1 + o[1];
}

TransportDerivativeReport transport_derivatives_check(const VectorField& u, const ScalarField& f,
                                                      const VectorField& v, const TransportOptions& opt) {
  TransportOptions o = opt;
  o.method = TransportMethod::characteristics;
  const GridPtr& gp = u.grid();
  auto base = characteristics(u, f, nullptr, o);
  auto full = characteristics(u + v, f, nullptr, o);
  auto half = characteristics(u + 0.5 * v, f, nullptr, o);
  const AffineVector ga = grad_affine(base.G, base.theta);
  AffineRHS rhs;
  rhs.f0 = ScalarField(gp);
  rhs.f1 = ScalarField(gp);
  for (int i = 0; i < 3; ++i) {
    rhs.f0 = rhs.f0 - mul(v[i], ga.p0[i], false);
    rhs.f1 = rhs.f1 - mul(v[i], ga.p1[i], false);
  }
  auto dg = characteristics(u, rhs.f0, &rhs.f1, o);

  TransportDerivativeReport rep;
  const ScalarField delta = full.value - base.value;
  rep.delta_norm = sup(delta);
  const ScalarField err = delta - dg.value;
  const ScalarField err_half = half.value - base.value - 0.5 * dg.value;
  rep.linear_error = sup(err);
  rep.half_error = sup(err_half);
  rep.quadratic_ratio = rep.half_error > 0 ? rep.linear_error / rep.half_error : 0.0;

  const Grid& g = *gp;
  auto cf = coefficients(err);
  const double k1 = g.spec().kappa1(), k2 = g.spec().kappa2();
  for (int j = 0; j < g.nz(); ++j)
    for (int m1 = -g.n1() / 2; m1 < g.n1() / 2; ++m1)
      for (int m2 = -g.n2() / 2; m2 < g.n2() / 2; ++m2) {
        const double a = std::abs(cf.at(m1, m2, j)) * g.wz()[j] / g.spec().d;
        if (std::max(std::abs(m1), std::abs(m2)) <= 2)
          rep.low_mode_error += a;
        else
          rep.high_mode_error += std::hypot(m1 * k1, m2 * k2) * a;
      }

  // closed form at u = c e1 with f = 1
  bool uniform = sup(u[1]) == 0.0 && sup(u[2]) == 0.0;
  const double c = u[0].v[0];
  for (double x : u[0].v) uniform = uniform && x == c;
  for (double x : f.v) uniform = uniform && x == 1.0;
  if (uniform) {
    const ScalarField x1 = scalar_from(gp, [](double x, double, double) { return x; });
    const ScalarField iv = integrate_x1(v[0]);
    ScalarField at0 = iv;
    for (int j = 0; j < g.nz(); ++j)
      for (int i1 = 0; i1 < g.n1(); ++i1)
        for (int i2 = 0; i2 < g.n2(); ++i2) at0.at(j, i1, i2) = iv.at(j, 0, i2);
    const ScalarField integral = mul(x1, mean_x1(v[0]), false) + iv - at0;
    rep.tau_u_closed_form = sup_diff(delta, (-1.0 / (c * c)) * integral);
  }
  return rep;
}

QIdentityReport q_derivative_identity(double c, const SurfaceField& eta_dot, double eps, const TransportOptions& opt) {
  const GridPtr& gp = eta_dot.grid;
  const double d = gp->spec().d;
  const VectorField u0 = constant_vector(gp, c, 0, 0);
  VectorField w = D_ufrak0(eta_dot);
  const FlatteningData fd0 = build_flattening(SurfaceField(gp, Parity{1, 1}));
  auto q_of = [&](const VectorField& u, const FlatteningData& fd) { return compute_time_functions(u, fd, opt); };

  const auto up = q_of(u0 + (eps * c) * w, fd0);
  const auto um = q_of(u0 - (eps * c) * w, fd0);
  const ScalarField du = (0.5 / eps) * (up.q - um.q);

  const auto ep = q_of(u0, build_flattening(eps * eta_dot));
  const auto em = q_of(u0, build_flattening(-eps * eta_dot));
  const ScalarField de = (0.5 / eps) * (ep.q - em.q);

  QIdentityReport r;
  r.du_term = sup(du);
  r.deta_term = sup(de);
  r.residual = sup(du + de);

  // d_eta tau = (1/(cd)) int_0^x1 eta_dot
  const ScalarField dtau = (0.5 / eps) * (ep.tau - em.tau);
  const ScalarField ed = broadcast(eta_dot);
  const ScalarField iv = integrate_x1(ed);
  ScalarField at0 = iv;
  const Grid& g = *gp;
  for (int j = 0; j < g.nz(); ++j)
    for (int i1 = 0; i1 < g.n1(); ++i1)
      for (int i2 = 0; i2 < g.n2(); ++i2) at0.at(j, i1, i2) = iv.at(j, 0, i2);
  const ScalarField x1 = scalar_from(gp, [](double x, double, double) { return x; });
  const ScalarField integral = mul(x1, mean_x1(ed), false) + iv - at0;
  r.deta_closed_form = sup_diff(dtau, (1.0 / (c * d)) * integral);
  return r;
}

}  // namespace lortz
