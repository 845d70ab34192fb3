#include "lortz/dispersion.hpp"

#include <cmath>

#include "lortz/errors.hpp"

namespace lortz {

double fbar(double k, double d) { return 1.0 / (k * std::tanh(k * d)); }

double ell(double k1, double k2, double c, const LatticeSpec& spec) {
  const double k = std::hypot(k1, k2);
  if (k == 0.0) return spec.g;
  return spec.g + spec.sigma * k * k - c * c * k1 * k1 * fbar(k, spec.d);
}

double ell_mode(int m1, int m2, double c, const LatticeSpec& spec) {
  return ell(m1 * spec.kappa1(), m2 * spec.kappa2(), c, spec);
}

double ell_dc(double k1, double k2, double c, const LatticeSpec& spec) {
  const double k = std::hypot(k1, k2);
  if (k == 0.0) return 0.0;
  return -2.0 * c * k1 * k1 * fbar(k, spec.d);
}

double c_star(const LatticeSpec& spec) {
  const double k1 = spec.kappa1(), k = spec.kappa_norm();
  return std::sqrt((spec.g + spec.sigma * k * k) / fbar(k, spec.d)) / k1;
}

namespace {

// phi_k = |k| tanh(|k| d) / k1^2 = 1 / (k1^2 fbar(|k|))
double phi(double k1, double k, double d) { return k * std::tanh(k * d) / (k1 * k1); }

}  // namespace

double sigma_star(int m1, int m2, const LatticeSpec& spec, bool* degenerate) {
  if (degenerate) *degenerate = false;
  const double k1 = m1 * spec.kappa1(), k2 = m2 * spec.kappa2();
  if (m1 == 0) return std::nan("");
  const double k = std::hypot(k1, k2), K = spec.kappa_norm();
  const double pk = phi(k1, k, spec.d), pK = phi(spec.kappa1(), K, spec.d);
  const double den = k * k * pk - K * K * pK;
  const double num = -spec.g * (pk - pK);
  if (std::abs(den) <= 1e-14 * (k * k * pk + K * K * pK)) {
    if (degenerate) *degenerate = std::abs(num) > 1e-14 * spec.g * (pk + pK);
    return std::nan("");
  }
  return num / den;
}

DispersionResult kernel_scan(const LatticeSpec& spec, int kmax, const ScanOptions& opt) {
  spec.validate();
  if (kmax < 1) throw ConfigError("kernel_scan: kmax must be at least 1");
  DispersionResult r;
  r.c_star = c_star(spec);
  r.kmax = kmax;
  r.sigma_margin = opt.sigma_margin;
  r.root_tol = opt.root_tol;
  const double K2 = spec.kappa1() * spec.kappa1() + spec.kappa2() * spec.kappa2();
  const double scale = spec.g + spec.sigma * K2;
  for (int m1 = -kmax; m1 <= kmax; ++m1)
    for (int m2 = -kmax; m2 <= kmax; ++m2) {
      const double l = ell_mode(m1, m2, r.c_star, spec);
      if (m1 != 0 && std::abs(l) < opt.root_tol * scale) r.solutions.push_back({m1, m2, l});
      if (m1 == 0 || (std::abs(m1) == 1 && std::abs(m2) == 1)) continue;
      bool deg = false;
      const double s = sigma_star(m1, m2, spec, &deg);
      if (deg) {
        r.degenerate.push_back({m1, m2, 0.0});
      } else if (std::isfinite(s) && s > 0 && std::abs(s - spec.sigma) < opt.sigma_margin) {
        r.sigma_star_hits.push_back({m1, m2, s});
      }
    }
  r.simple_kernel = r.solutions.size() == 4;
  return r;
}

}  // namespace lortz
