#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lortz/divcurl.hpp"
#include "lortz/errors.hpp"
#include "test_fields.hpp"

using namespace lortz;
using namespace lortz::testing;

TEST_CASE("uniform flow") {
  auto g = grid(16, 33);
  auto fd0 = flat(g);
  auto e1 = constant_vector(g, 1, 0, 0);
  auto r = apply_C(e1, fd0);
  CHECK(sup(r.g) < 1e-12);
  CHECK(r.c == doctest::Approx(1.0).epsilon(1e-15));
  auto r2 = apply_C(constant_vector(g, 2.5, 0, 0), fd0);
  CHECK(r2.c == doctest::Approx(2.5).epsilon(1e-15));
  VectorField zero(g, SymmetryClass::minus);
  auto u = invert_C0(zero, 1.0);
  auto c = coefficients(u[0]);
  double off = 0.0;
  for (int j = 0; j < g->nz(); ++j)
    for (int m1 = -8; m1 < 8; ++m1)
      for (int m2 = -8; m2 < 8; ++m2) off = std::max(off, std::abs(c.at(m1, m2, j) - (m1 == 0 && m2 == 0 ? 1.0 : 0.0)));
  CHECK(off == 0.0);
  CHECK(sup(u[1]) == 0.0);
  CHECK(sup(u[2]) == 0.0);
  CHECK(sup(invert_C0(zero, 0.0)) == 0.0);
  auto uf = ufrak(fd0);
  CHECK(uf.iterations == 1);
  CHECK(sup_diff(uf.f, e1) == 0.0);
}

TEST_CASE("invert_C0 recovers the data") {
  auto g = grid(16, 33);
  auto fd0 = flat(g);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    auto gg = random_curl_data(g, seed);
    const double c = 0.5 + 0.1 * seed;
    auto f = invert_C0(gg, c);
    CHECK(f.symmetry() == SymmetryClass::plus);
    auto r = apply_C(f, fd0);
    CHECK(sup_diff(r.g, gg) < 1e-9 * std::max(1.0, sup(gg)));
    CHECK(std::abs(r.c - c) < 1e-12);
    CHECK(sup(div(f)) < 1e-9);
    CHECK(coefficient_symmetry_defect(f, SymmetryClass::plus) < 1e-12);
  }
}

TEST_CASE("invert_C0 after apply_C is the identity on admissible fields") {
  auto g = grid(16, 33);
  auto fd0 = flat(g);
  for (unsigned seed = 11; seed <= 14; ++seed) {
    auto f = random_admissible(g, seed, 0.7);
    auto r = apply_C(f, fd0);
    auto back = invert_C0(r.g, r.c);
    CHECK(sup_diff(back, f) < 1e-9 * sup(f));
  }
}

TEST_CASE("apply_C rejects boundary violations") {
  auto g = grid(16, 17);
  auto f = constant_vector(g, 1, 0, 0);
  f[2] = constant_scalar(g, 0.1);
  CHECK_THROWS_AS(apply_C(f, flat(g)), ConfigError);
}

TEST_CASE("Neumann iteration and linearity") {
  auto g = grid(16, 33);
  auto fd = build_flattening(eta1(g, 0.02));
  auto gg = random_curl_data(g, 3);
  DivCurlOptions opt;
  opt.tol = 1e-13;
  auto a = invert_C(gg, 0.8, fd, opt);
  CHECK(a.iterations > 1);
  CHECK(a.contraction < 0.5);
  auto r = apply_C(a.f, fd);
  CHECK(sup_diff(r.g, gg) < 1e-8 * sup(gg));
  CHECK(std::abs(r.c - 0.8) < 1e-12);
  auto b = invert_C(3.0 * gg, 2.4, fd, opt);
  CHECK(sup_diff(b.f, 3.0 * a.f) < 1e-12 * sup(b.f));
  // f3 = 0 on the planes by construction
  const int nz = g->nz();
  for (int i = 0; i < g->nh(); ++i) {
    CHECK(a.f[2].v[i] == 0.0);
    CHECK(a.f[2].v[size_t(nz - 1) * g->nh() + i] == 0.0);
  }
  CHECK(sup(div(a.f)) < 1e-9);
  CHECK_THROWS_AS(invert_C(gg, 0.8, build_flattening(eta1(g, 0.9)), opt), OutOfRegimeError);
}

TEST_CASE("derivative of ufrak") {
  auto g = grid(16, 33);
  auto ed = eta1(g, 1.0);
  auto w = D_ufrak0(ed);
  // the potential part grad d1 chi is curl-free; the affine part carries all of curl(w)
  CHECK(sup(curl(grad(diff(chi(ed), 1)))) < 1e-9);
  VectorField affine(g);
  affine[0] = broadcast(ed);
  affine[1] = ScalarField(g);
  affine[2] = -1.0 * mul(broadcast(diff(ed, 1)),
                         scalar_from(g, [](double, double, double z) { return 1.0 + z; }), false);
  CHECK(sup_diff(curl(w), curl(affine)) < 1e-9);
  CHECK(std::abs(mean(w[0])) < 1e-12);
  const int nz = g->nz();
  double bc = 0.0;
  for (int i = 0; i < g->nh(); ++i)
    bc = std::max({bc, std::abs(w[2].v[i]), std::abs(w[2].v[size_t(nz - 1) * g->nh() + i])});
  CHECK(bc < 1e-12);
  CHECK(coefficient_symmetry_defect(w, SymmetryClass::plus) < 1e-12);
  CHECK(sup(D_ufrak0(SurfaceField(g, Parity{1, 1}))) == 0.0);

  auto e1 = constant_vector(g, 1, 0, 0);
  std::vector<double> ts = {1e-2, 1e-3}, errs;
  for (double t : ts) {
    auto u = ufrak(build_flattening(eta1(g, t))).f;
    auto rem = u - e1 - t * w;
    errs.push_back(sup(rem));
    auto fdq = (1.0 / t) * (u - e1);
    CHECK(sup_diff(fdq, w) < 10 * t);
  }
  const double slope = std::log(errs[0] / errs[1]) / std::log(ts[0] / ts[1]);
  CHECK(slope >= 1.9);
}

TEST_CASE("chi modes") {
  auto g = grid(16, 17);
  auto x = chi(eta1(g, 1.0));
  auto c = coefficients(x);
  const double K = std::sqrt(2.0);
  for (int j = 0; j < g->nz(); ++j) {
    const double f = std::cosh(K * (g->z()[j] + 1)) / (K * std::sinh(K));
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) CHECK(std::abs(c.at(s1, s2, j) - 0.25 * f) < 1e-14);
  }
  CHECK(frak_f(50.0, -0.3, 1.0) == doctest::Approx(std::exp(-15.0) / 50.0).epsilon(1e-12));
}

TEST_CASE("B form") {
  auto g = grid(16, 17);
  const double c = 0.3;
  auto B = B_form(surface_from(g, [c](double, double) { return c; }, Parity{1, 1}));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double ex = i != j ? 0.0 : (i == 2 ? c : -c);
      CHECK(sup_diff(B[i][j], constant_scalar(g, ex)) < 1e-15);
    }
  // first slot of DC[0] eta_dot applied to e1 equals curl(B e1)
  auto ed = eta1(g, 1.0);
  auto Be1 = apply_matrix(B_form(ed), constant_vector(g, 1, 0, 0));
  auto lin = curl(Be1);
  const double t = 1e-6;
  auto fd = build_flattening(eta1(g, t));
  auto e1 = constant_vector(g, 1, 0, 0);
  auto dc = (1.0 / t) * apply_C(e1, fd).g;
  CHECK(sup_diff(dc, lin) < 1e-5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sup_diff(B[i][j], B[j][i]) == 0.0);
}
