#include "lortz/expansion.hpp"

#include <cmath>

#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"

namespace lortz {

double CoshProfile::f(double z) const {
  const double e = std::exp(-2.0 * k * d);
  return (std::exp(k * z) + std::exp(-k * (z + 2.0 * d))) / (k * (1.0 - e));
}

double CoshProfile::fp(double z) const {
  const double e = std::exp(-2.0 * k * d);
  return (std::exp(k * z) - std::exp(-k * (z + 2.0 * d))) / (1.0 - e);
}

namespace {

struct Wave {
  double k1, k2, K, d;
  CoshProfile f;
  explicit Wave(const LatticeSpec& s)
      : k1(s.kappa1()), k2(s.kappa2()), K(s.kappa_norm()), d(s.d), f{s.kappa_norm(), s.d} {}
};

double Qprime_local(const LatticeSpec& s, double c, const BernoulliFunctionH& h) {
  return c + s.lambda1 * h.prime(s.lambda1 / c) / (c * c);
}

ScalarField zero_field(GridPtr g, Parity p) { return ScalarField(g, p); }

}  // namespace

FirstOrderFields first_order_fields(GridPtr g, double c) {
  const Wave w(g->spec());
  FirstOrderFields r;
  r.phi1 = scalar_from(g, [&](double x, double y, double z) {
    return -c * w.k1 * std::sin(w.k1 * x) * std::cos(w.k2 * y) * w.f.f(z);
  }, Parity{-1, 1});
  r.tau1 = (-1.0 / (c * c)) * r.phi1;
  r.tau1.par = Parity{-1, 1};
  r.u1 = VectorField(g, SymmetryClass::plus);
  r.u1[0] = scalar_from(g, [&](double x, double y, double z) {
    return c * std::cos(w.k1 * x) * std::cos(w.k2 * y) * (1.0 / w.d - w.k1 * w.k1 * w.f.f(z));
  }, Parity{1, 1});
  r.u1[1] = scalar_from(g, [&](double x, double y, double z) {
    return c * w.k1 * w.k2 * std::sin(w.k1 * x) * std::sin(w.k2 * y) * w.f.f(z);
  }, Parity{-1, -1});
  r.u1[2] = scalar_from(g, [&](double x, double y, double z) {
    return c * w.k1 * std::sin(w.k1 * x) * std::cos(w.k2 * y) * ((1.0 + z / w.d) - w.f.fp(z));
  }, Parity{-1, 1});
  r.u1.divergence_free = true;
  return r;
}

double K_profile(const LatticeSpec& s, double x2, double x3) {
  const Wave w(s);
  const double f = w.f.f(x3), fp = w.f.fp(x3);
  return w.K * w.K * f * f + fp * fp + ((w.k1 * w.k1 - w.k2 * w.k2) * f * f + fp * fp) * std::cos(2 * w.k2 * x2);
}

double K_profile_dx3(const LatticeSpec& s, double x2, double x3) {
  const Wave w(s);
  return 4.0 * w.f.f(x3) * w.f.fp(x3) * (w.K * w.K + w.k1 * w.k1 * std::cos(2 * w.k2 * x2));
}

double K_plus(const LatticeSpec& s, double x3) { return K_profile(s, 0.0, x3); }
double K_minus(const LatticeSpec& s, double x3) { return K_profile(s, 0.5 * kPi / s.kappa2(), x3); }

double qfrak(const LatticeSpec& s, double c, const BernoulliFunctionH& h, double K) {
  const Wave w(s);
  return kPi * w.k1 / (2.0 * Qprime_local(s, c, h)) * (K - w.f.fbar() / w.d);
}

double q2_value(const LatticeSpec& s, double c, const BernoulliFunctionH& h, double x2, double x3) {
  return qfrak(s, c, h, K_profile(s, x2, x3));
}

double q2_dx3(const LatticeSpec& s, double c, const BernoulliFunctionH& h, double x2, double x3) {
  return kPi * s.kappa1() / (2.0 * Qprime_local(s, c, h)) * K_profile_dx3(s, x2, x3);
}

Q2Data q2_field(GridPtr g, double c, const BernoulliFunctionH& h) {
  const LatticeSpec& s = g->spec();
  const Wave w(s);
  Q2Data r;
  r.q0 = s.lambda1 / c;
  r.hprime0 = h.prime(r.q0);
  r.Qprime = Qprime_local(s, c, h);
  if (!(r.Qprime > 0.0)) throw ConfigError("Q'(c) <= 0: the second-order period correction is undefined");
  r.U2 = c * w.k1 * w.k1 * w.f.fbar() / (4.0 * w.d);
  r.q2 = scalar_from(g, [&](double, double y, double z) { return q2_value(s, c, h, y, z); }, Parity{1, 1});
  return r;
}

Eta2Profile eta2_profile(GridPtr g, double c, double resonance_tol) {
  const LatticeSpec& s = g->spec();
  const Wave w(s);
  const double fb = w.f.fbar();
  const double f2k1 = CoshProfile{2 * w.k1, w.d}.fbar(), f2K = CoshProfile{2 * w.K, w.d}.fbar();
  const double k1s = w.k1 * w.k1, k2s = w.k2 * w.k2, Ks = w.K * w.K;
  Eta2Profile r;
  r.a = {1.0 - fb * fb * Ks - 2.0 * fb / w.d, 3.0 - fb * fb * (k1s - k2s) - 8.0 * k1s * fb * f2k1,
         1.0 - fb * fb * (k1s - k2s), 3.0 - fb * fb * Ks - 8.0 * Ks * fb * f2K};
  const int m[4][2] = {{0, 0}, {2, 0}, {0, 2}, {2, 2}};
  const char* names[4] = {"0", "2 kappa1 e1", "2 kappa2 e2", "2 kappa"};
  for (int i = 0; i < 4; ++i) {
    const double q1 = m[i][0] * w.k1, q2 = m[i][1] * w.k2;
    r.ell[i] = ell(q1, q2, c, s);
    if (std::abs(r.ell[i]) < resonance_tol * (s.g + s.sigma * (q1 * q1 + q2 * q2)))
      throw OutOfRegimeError(std::string("second-harmonic resonance: l_k(c) = 0 at k = ") + names[i]);
    r.amp[i] = c * c * k1s / 8.0 * r.a[i] / r.ell[i];
  }
  const CosModes a = r.amp;
  r.eta2 = surface_from(g, [&](double x, double y) {
    const double C1 = std::cos(2 * w.k1 * x), C2 = std::cos(2 * w.k2 * y);
    return a[0] + a[1] * C1 + a[2] * C2 + a[3] * C1 * C2;
  }, Parity{1, 1});
  return r;
}

Phi2Alpha1 phi2_alpha1(GridPtr g, double c, const Eta2Profile& eta2, double amplitude) {
  const Wave w(g->spec());
  const double s2 = amplitude * amplitude;
  const double k1s = w.k1 * w.k1, Ks = w.K * w.K;
  Phi2Alpha1 r;
  // ((d2 eta1)^2 - (k1^2 + |k|^2) eta1^2)/2
  r.alpha1 = surface_from(g, [&](double x, double y) {
    const double e = amplitude * std::cos(w.k1 * x) * std::cos(w.k2 * y);
    const double e2 = -amplitude * w.k2 * std::cos(w.k1 * x) * std::sin(w.k2 * y);
    return 0.5 * (e2 * e2 - (k1s + Ks) * e * e);
  }, Parity{1, 1});
  r.alpha_amp = {-0.25 * s2 * k1s, -0.25 * s2 * k1s, -0.25 * s2 * Ks, -0.25 * s2 * Ks};
  const double fb = w.f.fbar();
  CosModes X;
  for (int i = 0; i < 4; ++i) X[i] = eta2.amp[i] + fb * r.alpha_amp[i];
  const CoshProfile f2k1{2 * w.k1, w.d}, f2K{2 * w.K, w.d};
  r.phi2 = scalar_from(g, [&](double x, double y, double z) {
    const double s1 = std::sin(w.k1 * x), c1 = std::cos(w.k1 * x), c2 = std::cos(w.k2 * y);
    const double d3phi1 = -c * w.k1 * s1 * c2 * w.f.fp(z);
    const double pi1 = c1 * c2 * (1.0 + z / w.d);
    const double chi1 = -2.0 * w.k1 * std::sin(2 * w.k1 * x) *
                        (X[1] * f2k1.f(z) + X[3] * std::cos(2 * w.k2 * y) * f2K.f(z));
    return s2 * d3phi1 * pi1 + c * chi1;
  }, Parity{-1, 1});
  return r;
}

VectorField vorticity2(GridPtr g, double c, const BernoulliFunctionH& h) {
  const LatticeSpec& s = g->spec();
  const Wave w(s);
  VectorField om(g, SymmetryClass::minus);
  const double hp = h.prime(s.lambda1 / c);
  if (hp == 0.0) return om;
  const double a = kPi * w.k1 / (2.0 * Qprime_local(s, c, h)) * hp / c;
  om[1] = scalar_from(g, [&](double, double y, double z) {
    return a * 4.0 * w.f.f(z) * w.f.fp(z) * (w.K * w.K + w.k1 * w.k1 * std::cos(2 * w.k2 * y));
  }, Parity{1, 1});
  om[2] = scalar_from(g, [&](double, double y, double z) {
    const double f = w.f.f(z), fp = w.f.fp(z);
    return a * 2.0 * w.k2 * std::sin(2 * w.k2 * y) * ((w.k1 * w.k1 - w.k2 * w.k2) * f * f + fp * fp);
  }, Parity{1, -1});
  om.divergence_free = true;
  return om;
}

namespace {

// grad pi[eta1] with d3 pi = eta1/d
std::array<ScalarField, 3> grad_pi1(GridPtr g) {
  const Wave w(g->spec());
  std::array<ScalarField, 3> p;
  p[0] = scalar_from(g, [&](double x, double y, double z) {
    return -w.k1 * std::sin(w.k1 * x) * std::cos(w.k2 * y) * (1.0 + z / w.d);
  }, Parity{-1, 1});
  p[1] = scalar_from(g, [&](double x, double y, double z) {
    return -w.k2 * std::cos(w.k1 * x) * std::sin(w.k2 * y) * (1.0 + z / w.d);
  }, Parity{1, -1});
  p[2] = scalar_from(g, [&](double x, double y, double) {
    return std::cos(w.k1 * x) * std::cos(w.k2 * y) / w.d;
  }, Parity{1, 1});
  return p;
}

}  // namespace

MatrixField B_closed(GridPtr g) {
  const auto p = grad_pi1(g);
  MatrixField B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      ScalarField v = zero_field(g, {});
      if (i == 2) v = v + p[j];
      if (j == 2) v = v + p[i];
      if (i == j) v = v - p[2];
      B[i][j] = v;
    }
  return B;
}

MatrixField M_closed(GridPtr g) {
  const auto p = grad_pi1(g);
  MatrixField M;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      M[i][j] = zero_field(g, {});
      if (i < 2 && j < 2) M[i][j] = mul(p[i], p[j], false);
      if (i == j && i < 2) M[i][j] = M[i][j] + mul(p[2], p[2], false);
    }
  return M;
}

ExpansionData expand(GridPtr g, double c, const BernoulliFunctionH& h) {
  ExpansionData e;
  e.c = c;
  const Wave w(g->spec());
  e.eta1 = surface_from(g, [&](double x, double y) { return std::cos(w.k1 * x) * std::cos(w.k2 * y); }, Parity{1, 1});
  e.first = first_order_fields(g, c);
  Q2Data q = q2_field(g, c, h);
  e.q0 = q.q0;
  e.Qprime = q.Qprime;
  e.hprime0 = q.hprime0;
  e.U2 = q.U2;
  e.q2 = std::move(q.q2);
  e.eta2 = eta2_profile(g, c);
  e.second = phi2_alpha1(g, c, e.eta2);
  e.omega2 = vorticity2(g, c, h);
  return e;
}

double BM_identity_defect(GridPtr g, double c) {
  const FirstOrderFields f = first_order_fields(g, c);
  const MatrixField B = B_closed(g), M = M_closed(g);
  const VectorField lhs = apply_matrix(B, f.u1, false) + apply_matrix(M, constant_vector(g, c, 0, 0), false);
  const VectorField rhs = apply_matrix(B, grad(f.phi1), false);
  return sup_diff(lhs, rhs);
}

double grad_phi1_display_defect(GridPtr g, double c) {
  const Wave w(g->spec());
  const FirstOrderFields f = first_order_fields(g, c);
  const VectorField gp = grad(f.phi1);
  const double fb = w.f.fbar(), k1s = w.k1 * w.k1, k2s = w.k2 * w.k2, Ks = w.K * w.K;
  double worst = 0.0;
  for (int i1 = 0; i1 < g->n1(); ++i1)
    for (int i2 = 0; i2 < g->n2(); ++i2) {
      const double C1 = std::cos(2 * w.k1 * g->x1()[i1]), C2 = std::cos(2 * w.k2 * g->x2()[i2]);
      const double disp = c * c * k1s * fb * fb / 8.0 * (Ks * (1.0 + C1 * C2) + (k1s - k2s) * (C1 + C2)) +
                          c * c * k1s / 8.0 * (1.0 - C1 + C2 - C1 * C2);
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += gp[k].at(0, i1, i2) * gp[k].at(0, i1, i2);
      worst = std::max(worst, std::abs(0.5 * s - disp));
    }
  return worst;
}

SurfaceField first_order_dynamic_residual(GridPtr g, double c) {
  const LatticeSpec& s = g->spec();
  const FirstOrderFields f = first_order_fields(g, c);
  const Wave w(s);
  const SurfaceField e1 =
      surface_from(g, [&](double x, double y) { return std::cos(w.k1 * x) * std::cos(w.k2 * y); }, Parity{1, 1});
  SurfaceField r = c * level(f.u1[0], 0) - (c * c / s.d) * e1 + s.g * e1 - s.sigma * laplacian(e1);
  r.par = Parity{1, 1};
  return r;
}

double U2_quadrature(GridPtr g, double c, const BernoulliFunctionH& h) {
  const LatticeSpec& s = g->spec();
  const FirstOrderFields f = first_order_fields(g, c);
  const double Qp = Qprime_local(s, c, h), q0 = s.lambda1 / c, hp = h.prime(q0);
  // mean((1/c) h' q2(U) - (B grad phi1)_1) + U = 0 with q2(U) = q2(0) - q0 U/Q'
  const double b1 = mean(apply_matrix(B_closed(g), grad(f.phi1), false)[0]);
  const ScalarField q20 = scalar_from(g, [&](double, double y, double z) {
    return kPi * s.kappa1() / (2.0 * Qp) * K_profile(s, y, z);
  });
  return (b1 - hp / c * mean(q20)) / (1.0 - hp * q0 / (c * Qp));
}

}  // namespace lortz
