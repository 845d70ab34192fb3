#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"
#include "lortz/expansion.hpp"
#include "test_fields.hpp"

using namespace lortz;
using namespace lortz::testing;

namespace {

BernoulliFunctionH h_at(GridPtr g, double beta) {
  return BernoulliFunctionH::affine(beta, g->spec().lambda1 / c_star(g->spec()));
}

ScalarField lap3(const ScalarField& f) { return diff(diff(f, 1), 1) + diff(diff(f, 2), 2) + diff(diff(f, 3), 3); }

// Largest value of f on the two boundary planes.
double planes_sup(const ScalarField& f) {
  const Grid& g = *f.grid;
  double m = 0.0;
  for (int j : {0, g.nz() - 1})
    for (int i = 0; i < g.nh(); ++i) m = std::max(m, std::abs(f.v[size_t(j) * g.nh() + i]));
  return m;
}

ScalarField plane_linear(GridPtr g) {
  const double d = g->spec().d;
  return scalar_from(g, [d](double, double, double z) { return 1.0 + z / d; }, Parity{1, 1});
}

}  // namespace

TEST_CASE("first-order fields") {
  auto g = grid(16, 33);
  const double cs = c_star(g->spec());
  for (double c : {cs, 0.7 * cs}) {
    auto f = first_order_fields(g, c);
    CHECK(f.q1 == 0.0);
    CHECK(f.U1 == 0.0);
    CHECK(sup_diff(f.u1, c * D_ufrak0(eta1(g, 1.0))) < 1e-10);
    CHECK(sup(div(f.u1)) < 1e-10);
    CHECK(planes_sup(f.u1[2]) < 1e-14);
    CHECK(coefficient_symmetry_defect(f.u1, SymmetryClass::plus) < 1e-14);
    CHECK(sup_diff(f.tau1, (-1.0 / (c * c)) * f.phi1) == 0.0);
    // u1 - grad phi1 is the affine part c(eta1/d e1 - d1 pi e3)
    auto gp = grad(f.phi1);
    auto pi1 = mul(broadcast(eta1(g, 1.0)), plane_linear(g), false);
    CHECK(sup_diff(f.u1[2] - gp[2], -c * diff(pi1, 1)) < 1e-12);
  }
}

TEST_CASE("second-order period correction q2") {
  auto g = grid(16, 33);
  const auto& s = g->spec();
  const double cs = c_star(s), lam = s.lambda1;
  for (double beta : {0.0, 0.05, -0.05}) {
    auto h = h_at(g, beta);
    auto q = q2_field(g, cs, h);
    CHECK(q.U2 == doctest::Approx(cs * s.kappa1() * s.kappa1() * fbar(s.kappa_norm(), s.d) / (4 * s.d)));
    CHECK(q.Qprime == doctest::Approx(Q_prime(cs, s, h)).epsilon(1e-14));
    // Q' q2 = int_0^lambda1 |grad(d1 eta1 f)|^2 dx1 - q0 U2, by grid quadrature
    auto f = first_order_fields(g, cs);
    auto gp = grad((1.0 / cs) * f.phi1);
    ScalarField e2 = mul(gp[0], gp[0], false) + mul(gp[1], gp[1], false) + mul(gp[2], gp[2], false);
    ScalarField ex = (1.0 / q.Qprime) * (lam * mean_x1(e2) - constant_scalar(g, q.q0 * q.U2));
    CHECK(sup_diff(q.q2, ex) < 1e-12);
    // increasing in x3
    auto d3 = diff(q.q2, 3);
    double mn = 1e300;
    for (size_t i = 0; i < d3.v.size() - size_t(g->nh()); ++i) mn = std::min(mn, d3.v[i]);
    CHECK(mn > 0.0);
    for (int j = 0; j < g->nz(); ++j)
      for (int i2 = 0; i2 < g->n2(); ++i2) {
        const double z = g->z()[j], y = g->x2()[i2];
        // f' vanishes on the bottom, so the increase is strict only above it
        if (j < g->nz() - 1) CHECK(q2_dx3(s, cs, h, y, z) > 0.0);
        else CHECK(q2_dx3(s, cs, h, y, z) == 0.0);
        CHECK(std::abs(q2_dx3(s, cs, h, y, z) - d3.at(j, 0, i2)) < 1e-9);
        for (int i1 = 1; i1 < g->n1(); ++i1) CHECK(std::abs(q.q2.at(j, i1, i2) - q.q2.at(j, 0, i2)) < 1e-14);
      }
    // x2-average of Q' q2 + q0 U2
    const CoshProfile p{s.kappa_norm(), s.d};
    for (int j = 0; j < g->nz(); j += 4) {
      double avg = 0.0;
      for (int i2 = 0; i2 < g->n2(); ++i2) avg += q.Qprime * q.q2.at(j, 0, i2) + q.q0 * q.U2;
      avg /= g->n2();
      const double z = g->z()[j];
      const double want = kPi * s.kappa1() / 2 *
                          (s.kappa_norm() * s.kappa_norm() * p.f(z) * p.f(z) + p.fp(z) * p.fp(z));
      CHECK(avg == doctest::Approx(want).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(q2_field(g, cs, h_at(g, -50.0)), ConfigError);
}

TEST_CASE("second-order surface eta2") {
  auto g = grid(16, 33);
  const auto& s = g->spec();
  const double cs = c_star(s);
  const double K = s.kappa_norm(), fb = fbar(K, s.d);
  auto e = eta2_profile(g, cs);
  CHECK(e.a[3] == doctest::Approx(1 - 3 * fb * fb * K * K).epsilon(1e-13));
  CHECK(e.a[2] == 1.0);  // kappa1 = kappa2
  CHECK(e.ell[0] == s.g);
  CHECK(coefficient_symmetry_defect(e.eta2, Parity{1, 1}) < 1e-15);
  // four modes only
  auto cf = coefficients(e.eta2);
  for (int m1 = -8; m1 < 8; ++m1)
    for (int m2 = -8; m2 < 8; ++m2) {
      const bool allowed = (m1 == 0 || std::abs(m1) == 2) && (m2 == 0 || std::abs(m2) == 2);
      if (!allowed) CHECK(std::abs(cf.at(m1, m2, 0)) < 1e-15);
    }

  // oracle: L eta2 = -(|grad phi1|^2/2 - c^2 k1^2 eta1^2 + c U2 + c^2 d1^2 chi[fbar alpha1])
  auto f = first_order_fields(g, cs);
  auto pa = phi2_alpha1(g, cs, e);
  auto gp = grad(f.phi1);
  SurfaceField kin = 0.5 * (mul(level(gp[0], 0), level(gp[0], 0), false) + mul(level(gp[1], 0), level(gp[1], 0), false) +
                            mul(level(gp[2], 0), level(gp[2], 0), false));
  auto e1 = eta1(g, 1.0);
  auto L = [&](const SurfaceField& x) {
    return s.g * x - s.sigma * laplacian(x) + cs * cs * diff(diff(level(chi(x), 0), 1), 1);
  };
  const double U2 = q2_field(g, cs, h_at(g, 0.01)).U2;
  SurfaceField S = kin - (cs * cs * s.kappa1() * s.kappa1()) * mul(e1, e1, false) +
                   surface_from(g, [&](double, double) { return cs * U2; }) +
                   (cs * cs * fb) * diff(diff(level(chi(pa.alpha1), 0), 1), 1);
  CHECK(sup(L(e.eta2) + S) < 1e-11);

  // resonance of the second harmonic 2 kappa1 e1
  const double k1 = s.kappa1();
  const double c_res = std::sqrt((s.g + s.sigma * 4 * k1 * k1) / (4 * k1 * k1 * fbar(2 * k1, s.d)));
  CHECK(std::abs(ell(2 * k1, 0, c_res, s)) < 1e-12);
  CHECK_THROWS_AS(eta2_profile(g, c_res), OutOfRegimeError);
}

TEST_CASE("second-order dynamic condition in raw form") {
  auto g = grid(16, 33);
  const auto& s = g->spec();
  const double c = c_star(s), d = s.d;
  for (double beta : {0.0, 0.2}) {
    auto h = h_at(g, beta);
    auto ex = expand(g, c, h);
    const auto& u1 = ex.first.u1;
    auto B = B_closed(g);
    auto Bg = apply_matrix(B, grad(ex.first.phi1), false);
    // u2_1 = -(B grad phi1)_1 + (c/d) eta2 + (1/c) h' q2 + d1 phi2 + U2
    ScalarField u21 = -1.0 * Bg[0] + (c / d) * broadcast(ex.eta2.eta2) + (ex.hprime0 / c) * ex.q2 +
                      diff(ex.second.phi2, 1) + constant_scalar(g, ex.U2);
    auto top = [](const ScalarField& f) { return level(f, 0); };
    auto e1 = ex.eta1, e2 = ex.eta2.eta2;
    auto sq = [](const SurfaceField& a) { return mul(a, a, false); };
    SurfaceField r = 0.5 * (sq(top(u1[0])) + sq(top(u1[1])) + sq(top(u1[2]))) + c * top(u21) +
                     (0.5 * c * c) * sq(diff(e1, 1)) - (2 * c / d) * mul(e1, top(u1[0]), false) +
                     (1.5 * c * c / (d * d)) * sq(e1) - (c * c / d) * e2 + s.g * e2 - s.sigma * laplacian(e2) -
                     ex.hprime0 * top(ex.q2);
    CHECK(sup(r) < 1e-10);
  }
}

TEST_CASE("phi2 and alpha1") {
  // w below takes three vertical derivatives; nz = 17 keeps the Chebyshev round-off small
  auto g = grid(16, 17);
  const auto& s = g->spec();
  const double c = c_star(s);
  auto e = eta2_profile(g, c);
  auto pa = phi2_alpha1(g, c, e);
  const double k1 = s.kappa1(), k2 = s.kappa2(), K2 = s.kappa_norm() * s.kappa_norm();
  auto disp = surface_from(g, [&](double x, double y) {
    return -0.25 * (1 + std::cos(2 * k1 * x)) * (k1 * k1 + K2 * std::cos(2 * k2 * y));
  });
  CHECK(sup_diff(pa.alpha1, disp) < 1e-14);
  auto e1 = eta1(g, 1.0);
  auto de = diff(e1, 2);
  CHECK(sup_diff(pa.alpha1, 0.5 * (mul(de, de, false) - (k1 * k1 + K2) * mul(e1, e1, false))) < 1e-13);

  Eta2Profile z = e;
  z.amp = {0, 0, 0, 0};
  auto p0 = phi2_alpha1(g, c, z, 0.0);
  CHECK(sup(p0.alpha1) == 0.0);
  CHECK(sup(p0.phi2) == 0.0);

  // phi2 - d3 phi1 pi[eta1] is harmonic with Neumann data c d1 pi[eta2 + fbar alpha1]
  auto f = first_order_fields(g, c);
  auto pi1 = mul(broadcast(e1), plane_linear(g), false);
  ScalarField w = pa.phi2 - mul(diff(f.phi1, 3), pi1, false);
  CHECK(sup(lap3(w)) < 1e-8);
  const double fb = fbar(s.kappa_norm(), s.d);
  SurfaceField X = e.eta2 + fb * pa.alpha1;
  ScalarField nd = c * diff(mul(broadcast(X), plane_linear(g), false), 1);
  auto d3w = diff(w, 3);
  const int nb = g->nz() - 1;
  CHECK(sup_diff(level(d3w, 0), level(nd, 0)) < 1e-8);
  CHECK(sup(level(d3w, nb)) < 1e-8);

  // original form: lap phi2 = div(B grad phi1), d3 phi2 = (B grad phi1)_3 + c d1 pi[eta2] on the planes
  auto Bg = apply_matrix(B_closed(g), grad(f.phi1), false);
  CHECK(sup(lap3(pa.phi2) - div(Bg)) < 1e-8);
  ScalarField nd2 = Bg[2] + c * diff(mul(broadcast(e.eta2), plane_linear(g), false), 1);
  auto d3p = diff(pa.phi2, 3);
  CHECK(sup_diff(level(d3p, 0), level(nd2, 0)) < 1e-8);
  CHECK(sup_diff(level(d3p, nb), level(nd2, nb)) < 1e-8);
}

TEST_CASE("leading vorticity omega2") {
  auto g = grid(16, 33);
  const double c = c_star(g->spec());
  CHECK(sup(vorticity2(g, c, h_at(g, 0.0))) == 0.0);
  auto h = h_at(g, 0.01);
  auto w = vorticity2(g, c, h);
  CHECK(sup(w) > 0.0);
  CHECK(sup(w[0]) == 0.0);
  CHECK(sup(div(w)) < 1e-10);
  CHECK(coefficient_symmetry_defect(w, SymmetryClass::minus) < 1e-15);
  auto q = q2_field(g, c, h);
  const double a = h.prime(q.q0) / c;
  CHECK(sup_diff(w[1], a * diff(q.q2, 3)) < 1e-10);
  CHECK(sup_diff(w[2], -a * diff(q.q2, 2)) < 1e-12);
}

TEST_CASE("expansion invariants") {
  auto g = grid(16, 33);
  const auto& s = g->spec();
  const double cs = c_star(s);
  auto h = h_at(g, 0.01);
  CHECK(BM_identity_defect(g, cs) < 1e-10);
  CHECK(grad_phi1_display_defect(g, cs) < 1e-12);
  CHECK(sup(first_order_dynamic_residual(g, cs)) < 1e-10);
  const double c = 0.8 * cs;
  CHECK(sup_diff(first_order_dynamic_residual(g, c), ell(s.kappa1(), s.kappa2(), c, s) * eta1(g, 1.0)) < 1e-10);
  CHECK(U2_quadrature(g, cs, h) == doctest::Approx(q2_field(g, cs, h).U2).epsilon(1e-12));
  CHECK(U2_quadrature(g, cs, h_at(g, 0.3)) == doctest::Approx(q2_field(g, cs, h).U2).epsilon(1e-12));
  // B closed form against the divcurl construction
  auto Bd = B_form(eta1(g, 1.0));
  auto Bc = B_closed(g);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sup_diff(Bd[i][j], Bc[i][j]) < 1e-13);
}

TEST_CASE("numeric branch approaches the expansion") {
  auto g = grid(16, 17);
  const auto& s = g->spec();
  const double cs = c_star(s);
  auto h = h_at(g, 0.01);
  auto ex = expand(g, cs, h);
  // largest t first: the normalized errors must decrease as t -> 0
  auto br = continue_branch(g, h, {1e-2, 3e-3, 1e-3});
  double prev_q = 1e300, prev_w = 1e300;
  std::vector<double> err;
  for (auto& b : br) {
    const double t = b.t;
    err.push_back(sup(b.eta - t * ex.eta1 - (t * t) * ex.eta2.eta2));
    // q[t] = q0(c(t)) + t^2 q2 + o(t^2)
    ScalarField dq = (1.0 / (t * t)) * (b.tf.q - constant_scalar(g, s.lambda1 / b.c)) - ex.q2;
    CHECK(sup(dq) < prev_q);
    prev_q = sup(dq);
    auto om = flattened_curl_operator(b.u, build_flattening(b.eta));
    const double dw = sup_diff((1.0 / (t * t)) * om, ex.omega2);
    CHECK(dw < prev_w);
    prev_w = dw;
  }
  CHECK(prev_q < 0.1 * sup(ex.q2));
  CHECK(prev_w < 0.1 * sup(ex.omega2));
  const double sl = std::log(err[0] / err[2]) / std::log(10.0);
  CHECK(sl >= 2.5);
}
