#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lortz/bernoulli.hpp"
#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"
#include "test_fields.hpp"

using namespace lortz;
using namespace lortz::testing;

namespace {

const double kLog = std::log(1.0 + std::sqrt(2.0));

LatticeSpec spec_of(double k1, double k2, double d, int n = 16, int nz = 17) {
  return LatticeSpec::from_wavenumbers(k1, k2, d, 1.0, 1.0, n, n, nz);
}

BernoulliFunctionH affine_at(const LatticeSpec& s, double beta) {
  return BernoulliFunctionH::affine(beta, s.lambda1 / c_star(s));
}

BernoulliClassification classify_at(const LatticeSpec& s, double beta = 0.01) {
  return classify(s, c_star(s), affine_at(s, beta));
}

}  // namespace

TEST_CASE("boundary values of K+- match closed forms") {
  const auto s = spec_of(0.7, 1.3, 0.8);
  const double k1 = s.kappa1(), k2 = s.kappa2(), K = s.kappa_norm(), d = s.d;
  const double sh = std::sinh(K * d), co = 1.0 / std::tanh(K * d);
  CHECK(K_plus(s, -d) == doctest::Approx(2 * k1 * k1 / (K * K * sh * sh)).epsilon(1e-13));
  CHECK(K_minus(s, -d) == doctest::Approx(2 * k2 * k2 / (K * K * sh * sh)).epsilon(1e-13));
  CHECK(K_plus(s, 0.0) == doctest::Approx(2 * k1 * k1 * co * co / (K * K) + 2.0).epsilon(1e-13));
  CHECK(K_minus(s, 0.0) == doctest::Approx(2 * k2 * k2 * co * co / (K * K)).epsilon(1e-13));
  // K+ - K- is proportional to k1^2 cosh(2K(z+d)) - k2^2
  for (double z : {-0.8, -0.5, -0.2, 0.0}) {
    const double ratio = (K_plus(s, z) - K_minus(s, z)) / (k1 * k1 * std::cosh(2 * K * (z + d)) - k2 * k2);
    CHECK(ratio == doctest::Approx(2.0 / (K * K * sh * sh)).epsilon(1e-11));
  }
}

TEST_CASE("tori cases with |kappa| d = log(1 + sqrt 2)") {
  const double K = kLog;
  SUBCASE("kappa2 = |kappa|/2: no tori") {
    const auto s = spec_of(K * std::sqrt(3.0) / 2.0, K / 2.0, 1.0);
    auto cls = classify_at(s);
    CHECK_FALSE(cls.tori_exist);
    CHECK_FALSE(cls.indeterminate);
    CHECK(cls.I_ring.empty());
    CHECK_FALSE(cls.conditions.raw);
    CHECK_FALSE(cls.conditions.kappa);
    CHECK(cls.conditions.upper_trivial);
  }
  SUBCASE("kappa2 = |kappa|/sqrt 2: tori, I_ring strictly inside I") {
    const auto s = spec_of(K / std::sqrt(2.0), K / std::sqrt(2.0), 1.0);
    auto cls = classify_at(s);
    CHECK(cls.tori_exist);
    CHECK(cls.conditions.raw);
    CHECK(cls.conditions.kappa);
    CHECK_FALSE(cls.I_ring.empty());
    // kappa1 = kappa2: the bottom values coincide
    CHECK(cls.I.lo == doctest::Approx(cls.I_ring.lo).epsilon(1e-14));
    CHECK(cls.I_ring.hi < cls.I.hi);
  }
}

TEST_CASE("raw, kappa and profile conditions agree on random lattices") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> k(0.1, 3.0), dd(0.1, 3.0);
  int tested = 0, with_tori = 0;
  for (int n = 0; n < 1000; ++n) {
    const double k1 = k(rng), k2 = k(rng), d = dd(rng);
    auto tc = tori_conditions(k1, k2, d);
    if (std::abs(tc.margin) < 1e-9) continue;
    ++tested;
    with_tori += tc.raw;
    CHECK(tc.raw == tc.kappa);
    CHECK(tc.raw == tc.from_profiles);
    CHECK(crossing_count(spec_of(k1, k2, d), 801) <= 1);
  }
  CHECK(tested > 990);
  CHECK(with_tori > 0);
  CHECK(with_tori < tested);
}

TEST_CASE("classification guards") {
  const auto s = spec_of(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(classify(s, c_star(s), BernoulliFunctionH::zero(s.lambda1 / c_star(s))), ConfigError);
  // exactly on the equality k2^2 (1 + C^2) = |k|^2
  const double d = 1.0, K = 1.2, C = std::cosh(K * d);
  const double k2 = K / std::sqrt(1.0 + C * C), k1 = std::sqrt(K * K - k2 * k2);
  auto cls = classify(spec_of(k1, k2, d), c_star(spec_of(k1, k2, d)), affine_at(spec_of(k1, k2, d), 0.01), 1e-9);
  CHECK(cls.indeterminate);
  CHECK_FALSE(cls.tori_exist);
}

TEST_CASE("image of q2 is qfrak of the closure of I") {
  for (auto s : {spec_of(1.0, 1.0, 1.0), spec_of(0.6, 1.4, 0.5)}) {
    const double cs = c_star(s);
    auto h = affine_at(s, 0.01);
    auto cls = classify(s, cs, h);
    double lo = 1e300, hi = -1e300;
    for (int a = 0; a <= 200; ++a)
      for (int b = 0; b <= 200; ++b) {
        const double q = q2_value(s, cs, h, s.lambda2 * a / 200.0, -s.d + s.d * b / 200.0);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
    CHECK(cls.q_of_K(cls.I.lo) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(cls.q_of_K(cls.I.hi) == doctest::Approx(hi).epsilon(1e-12));
    CHECK(cls.q_of_K(1.3) == doctest::Approx(qfrak(s, cs, h, 1.3)).epsilon(1e-13));
  }
}

TEST_CASE("level surfaces of q2") {
  const auto s = spec_of(1.0, 1.0, 1.0);
  auto cls = classify_at(s);
  REQUIRE(cls.tori_exist);
  const double Km = 0.5 * (cls.I_ring.lo + cls.I_ring.hi);
  auto torus = level_surface_q2(s, Km);
  CHECK(torus.kind == SurfaceKind::torus);
  CHECK(torus.count() == int(torus.x2.size()));
  for (size_t i = 0; i < torus.x2.size(); ++i)
    CHECK(std::abs(K_profile(s, torus.x2[i], torus.at(0, i)) - Km) < 1e-11);

  auto annulus = level_surface_q2(s, 0.5 * (cls.I_ring.hi + cls.I.hi));
  CHECK(annulus.kind == SurfaceKind::annulus);
  CHECK(annulus.count() >= 1);
  CHECK(annulus.count() < int(annulus.x2.size()));
  for (size_t i = 0; i < annulus.x2.size(); ++i)
    if (!annulus.mask[i]) CHECK(std::isnan(annulus.at(0, i)));

  CHECK(level_surface_q2(s, cls.I.lo - 1.0).kind == SurfaceKind::empty);
  CHECK(level_surface_q2(s, cls.I.hi + 1.0).kind == SurfaceKind::empty);

  // psi increases with K where defined; below I_ring the domain only grows
  auto prev = level_surface_q2(s, cls.I.lo + 1e-3);
  for (int n = 1; n <= 20; ++n) {
    const double K = cls.I.lo + 1e-3 + (cls.I_ring.hi - cls.I.lo - 2e-3) * n / 20.0;
    auto cur = level_surface_q2(s, K);
    for (size_t i = 0; i < cur.x2.size(); ++i)
      if (prev.mask[i] && cur.mask[i]) CHECK(cur.at(0, i) > prev.at(0, i));
    if (K <= cls.I_ring.lo) CHECK(cur.count() >= prev.count());
    prev = cur;
  }
}

TEST_CASE("physical surfaces") {
  auto g = grid(16, 17);
  const auto& s = g->spec();
  auto cls = classify_at(s);
  auto base = level_surface_q2(s, 0.5 * (cls.I_ring.lo + cls.I_ring.hi), 17);
  auto same = to_physical(base, SurfaceField(g, Parity{1, 1}));
  CHECK(same.physical);
  for (size_t i = 0; i < base.psi.size(); ++i) CHECK(same.psi[i] == base.psi[i]);

  const double t = 1e-3;
  auto e = eta1(g, t);
  auto phys = to_physical(base, e);
  REQUIRE(phys.x1.size() == size_t(g->n1()));
  double dev = 0.0;
  for (size_t a = 0; a < phys.x1.size(); ++a)
    for (size_t b = 0; b < phys.x2.size(); ++b) dev = std::max(dev, std::abs(phys.at(a, b) - base.at(0, b)));
  CHECK(dev <= sup(e) * (1.0 + 1e-12));
  CHECK(dev > 0.0);

  LevelSurface bottom = base;
  std::fill(bottom.psi.begin(), bottom.psi.end(), -s.d);
  auto pb = to_physical(bottom, e);
  for (double v : pb.psi) CHECK(v == doctest::Approx(-s.d).epsilon(1e-15));
}

TEST_CASE("level surfaces of the numeric q approach those of q2") {
  auto g = grid(16, 17);
  const auto& s = g->spec();
  auto h = affine_at(s, 0.01);
  auto cls = classify(s, c_star(s), h);
  const double K = 0.5 * (cls.I_ring.lo + cls.I_ring.hi);
  auto ref = level_surface_q2(s, K, g->n2() + 1);
  auto br = continue_branch(g, h, {1e-2, 3e-3, 1e-3});
  double prev = 1e300;
  for (auto& b : br) {
    auto surf = level_surface_full(b, cls, K);
    CHECK(surf.kind == SurfaceKind::torus);
    double err = 0.0;
    for (int a = 0; a < g->n1(); ++a)
      for (int i2 = 0; i2 < g->n2(); ++i2) err = std::max(err, std::abs(surf.at(a, i2) - ref.at(0, i2)));
    MESSAGE("t = " << b.t << " surface error " << err);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.05 * s.d);
  auto far = level_surface_full(br.back(), cls, cls.I.hi + 10.0);
  CHECK(far.kind == SurfaceKind::empty);
  auto an = level_surface_full(br.back(), cls, 0.5 * (cls.I_ring.hi + cls.I.hi));
  CHECK(an.kind == SurfaceKind::annulus);
  CHECK(an.count() >= 1);
}
