#pragma once

// Shared fixtures for the unit tests: grids and band-limited random fields
// with prescribed parities.

#include <cmath>
#include <random>
#include <vector>

#include "lortz/flattening.hpp"

namespace lortz::testing {

inline GridPtr grid(int n = 16, int nz = 17, double k1 = 1.0, double k2 = 1.0) {
  return make_grid(LatticeSpec::from_wavenumbers(k1, k2, 1, 1, 1, n, n, nz));
}

inline FlatteningData flat(GridPtr g) { return build_flattening(SurfaceField(g, Parity{1, 1})); }

inline SurfaceField eta1(GridPtr g, double t) {
  const double a = g->spec().kappa1(), b = g->spec().kappa2();
  return surface_from(g, [=](double x1, double x2) { return t * std::cos(a * x1) * std::cos(b * x2); }, Parity{1, 1});
}

// sum over m1, m2 <= kmax of P(z) * trig(m1 k1 x1) * trig(m2 k2 x2), P quadratic,
// optionally multiplied by z (z + d) so the field vanishes on both planes.
inline ScalarField random_scalar(GridPtr g, Parity p, unsigned seed, int kmax = 3, bool vanish = false,
                                 double amp = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double k1 = g->spec().kappa1(), k2 = g->spec().kappa2(), d = g->spec().d;
  struct Term { int a, b; double c0, c1, c2; };
  std::vector<Term> terms;
  for (int a = 0; a <= kmax; ++a)
    for (int b = 0; b <= kmax; ++b) {
      double s = amp / (1.0 + a * a + b * b);
      terms.push_back({a, b, s * U(rng), s * U(rng), s * U(rng)});
    }
  return scalar_from(g, [=](double x1, double x2, double z) {
    double s = 0.0;
    for (auto& t : terms) {
      double f1 = p.p1 > 0 ? std::cos(t.a * k1 * x1) : std::sin(t.a * k1 * x1);
      double f2 = p.p2 > 0 ? std::cos(t.b * k2 * x2) : std::sin(t.b * k2 * x2);
      s += (t.c0 + t.c1 * z + t.c2 * z * z) * f1 * f2;
    }
    return vanish ? s * z * (z + d) : s;
  }, p);
}

inline VectorField random_vector(GridPtr g, SymmetryClass s, unsigned seed, int kmax = 3, bool vanish12 = false,
                                 double amp = 1.0) {
  auto p = vector_parity(s);
  VectorField A;
  for (int i = 0; i < 3; ++i) A[i] = random_scalar(g, p[i], seed * 7 + i, kmax, vanish12 && i < 2, amp);
  return A;
}

// Admissible right-hand side: curl of a random (+)-field, hence (-) and div-free.
inline VectorField random_curl_data(GridPtr g, unsigned seed, int kmax = 3) {
  return curl(random_vector(g, SymmetryClass::plus, seed, kmax));
}

// c e1 + curl A with A (-) and A1 = A2 = 0 on the planes: (+), div-free, f3 = 0 there.
inline VectorField random_admissible(GridPtr g, unsigned seed, double c, int kmax = 3, double amp = 1.0) {
  VectorField f = curl(random_vector(g, SymmetryClass::minus, seed, kmax, true, amp));
  f[0] = f[0] + constant_scalar(g, c);
  f[0].par = Parity{1, 1};
  const int nz = g->nz(), nh = g->nh();
  for (int i = 0; i < nh; ++i) f[2].v[i] = f[2].v[size_t(nz - 1) * nh + i] = 0.0;
  f.divergence_free = true;
  return f;
}

}  // namespace lortz::testing
