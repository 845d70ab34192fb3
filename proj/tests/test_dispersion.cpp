#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "lortz/dispersion.hpp"

using namespace lortz;
using boost::multiprecision::cpp_bin_float_50;

namespace {

LatticeSpec unit() { return LatticeSpec::from_wavenumbers(1, 1, 1, 1, 1, 16, 16, 17); }

// c* = (1/kappa1) sqrt((g + sigma|kappa|^2) |kappa| tanh(|kappa| d)) in 50 digits.
double c_star_mp(double k1, double k2, double d, double g, double s) {
  cpp_bin_float_50 K = sqrt(cpp_bin_float_50(k1) * k1 + cpp_bin_float_50(k2) * k2);
  cpp_bin_float_50 v = (cpp_bin_float_50(g) + cpp_bin_float_50(s) * K * K) * K * tanh(K * d);
  return static_cast<double>(sqrt(v) / k1);
}

}  // namespace

TEST_CASE("ell basics") {
  auto s = unit();
  CHECK(ell(0, 0, 2.0, s) == 1.0);
  const double c = c_star(s);
  CHECK(std::abs(ell(1, 1, c, s)) < 1e-12);
  CHECK(std::abs(ell(1, -1, c, s)) < 1e-12);
  CHECK(std::abs(ell(-1, 1, c, s)) < 1e-12);
  for (int m1 = -3; m1 <= 3; ++m1)
    for (int m2 = -3; m2 <= 3; ++m2) {
      CHECK(ell_mode(m1, m2, 1.3, s) == ell_mode(-m1, m2, 1.3, s));
      CHECK(ell_mode(m1, m2, 1.3, s) == ell_mode(m1, -m2, 1.3, s));
    }
  // d/dc by central differences
  const double h = 1e-6;
  CHECK(ell_dc(1, 1, c, s) == doctest::Approx((ell(1, 1, c + h, s) - ell(1, 1, c - h, s)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("c_star against a 50-digit evaluation") {
  auto s = unit();
  const double ref = c_star_mp(1, 1, 1, 1, 1);
  CHECK(std::abs(c_star(s) - ref) / ref < 1e-13);
  CHECK(ref == doctest::Approx(1.9414).epsilon(1e-4));
  auto t = LatticeSpec::from_wavenumbers(1.3, 0.4, 0.7, 9.81, 0.07, 16, 16, 17);
  const double r2 = c_star_mp(1.3, 0.4, 0.7, 9.81, 0.07);
  CHECK(std::abs(c_star(t) - r2) / r2 < 1e-13);
  CHECK(std::abs(ell(1.3, 0.4, c_star(t), t)) < 1e-12 * (t.g + t.sigma * (1.69 + 0.16)));
}

TEST_CASE("c_star monotone in sigma and zero-gravity limit") {
  auto s = unit();
  double prev = 0.0;
  for (double sig = 0.1; sig < 5.0; sig += 0.1) {
    s.sigma = sig;
    double c = c_star(s);
    CHECK(c > prev);
    prev = c;
  }
  s.sigma = 1.0;
  s.g = 1e-300;
  const double K = std::sqrt(2.0);
  CHECK(c_star(s) == doctest::Approx(std::sqrt(K * K / fbar(K, 1.0))).epsilon(1e-14));
}

TEST_CASE("kernel scan") {
  auto s = unit();
  auto r = kernel_scan(s, 10);
  CHECK(r.simple_kernel);
  REQUIRE(r.solutions.size() == 4);
  for (auto& m : r.solutions) {
    CHECK(std::abs(m.m1) == 1);
    CHECK(std::abs(m.m2) == 1);
  }
  // brute force over all 441 modes
  int count = 0;
  for (int m1 = -10; m1 <= 10; ++m1)
    for (int m2 = -10; m2 <= 10; ++m2) {
      double k1 = m1, k2 = m2, K = std::hypot(k1, k2);
      double l = K == 0 ? 1.0 : 1.0 + K * K - r.c_star * r.c_star * k1 * k1 / (K * std::tanh(K));
      if (std::abs(l) < 1e-9) ++count;
    }
  CHECK(count == 4);
  auto r15 = kernel_scan(s, 15);
  CHECK(r15.solutions.size() == r.solutions.size());
  CHECK(r15.simple_kernel == r.simple_kernel);
  for (int m2 = -10; m2 <= 10; ++m2) CHECK(std::abs(ell_mode(0, m2, r.c_star, s)) > 0.5);
}

TEST_CASE("sigma star reproduces a resonance") {
  // Pick sigma = sigma*(k) for k = (2, 1): then k joins the kernel.
  auto s = unit();
  const double ss = sigma_star(2, 1, s);
  REQUIRE(std::isfinite(ss));
  if (ss > 0) {
    s.sigma = ss;
    auto r = kernel_scan(s, 10);
    CHECK_FALSE(r.simple_kernel);
    CHECK(!r.sigma_star_hits.empty());
  } else {
    CHECK(std::abs(ell_mode(2, 1, c_star(s), s)) > 1e-6);
  }
}
