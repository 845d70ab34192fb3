#include "lortz/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"

namespace lortz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Root of an increasing function on [a, b] with F(a) <= 0 <= F(b).
template <class F, class DF>
double monotone_root(const F& f, const DF& df, double a, double b, double tol) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  while (b - a > 1e3 * tol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm > 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  // safeguarded Newton polish inside the bracket
  double x = 0.5 * (a + b);
  for (int it = 0; it < 30 && b - a > tol; ++it) {
    const double fx = f(x), dx = df(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) b = x; else a = x;
    double xn = dx > 0.0 ? x - fx / dx : 0.5 * (a + b);
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    if (std::abs(xn - x) < tol) return xn;
    x = xn;
  }
  return x;
}

SurfaceKind kind_of(const LevelSurface& s, double floor) {
  int inside = 0, touching = 0;
  for (size_t i = 0; i < s.psi.size(); ++i) {
    if (!s.mask[i]) continue;
    ++inside;
    if (s.psi[i] <= floor || s.psi[i] >= 0.0) ++touching;
  }
  if (inside == 0) return SurfaceKind::empty;
  if (inside == int(s.psi.size()) && touching == 0) return SurfaceKind::torus;
  return SurfaceKind::annulus;
}

}  // namespace

ToriConditions tori_conditions(double k1, double k2, double d) {
  ToriConditions r;
  const double Ks = k1 * k1 + k2 * k2, K = std::sqrt(Ks);
  const double C = std::cosh(K * d), S = std::sinh(K * d);
  const double lhs = std::min(k2 * k2 * C * C, k1 * k1 * C * C + Ks * S * S);
  const double rhs = std::max(k1 * k1, k2 * k2);
  r.raw = lhs > rhs;
  r.margin = (lhs - rhs) / rhs;
  r.kappa = Ks / (1.0 + C * C) < k2 * k2 && k2 * k2 < Ks * std::cosh(2 * K * d) / (1.0 + C * C);
  r.upper_trivial = K * d >= std::log(1.0 + std::sqrt(2.0)) * (1.0 - 1e-14);
  const LatticeSpec s = LatticeSpec::from_wavenumbers(k1, k2, d, 1.0, 1.0, 16, 16, 17);
  const double bot = std::max(K_plus(s, -d), K_minus(s, -d)), top = std::min(K_plus(s, 0.0), K_minus(s, 0.0));
  r.from_profiles = bot < top;
  return r;
}

double BernoulliClassification::K_plus(double x3) const { return lortz::K_plus(spec, x3); }
double BernoulliClassification::K_minus(double x3) const { return lortz::K_minus(spec, x3); }

BernoulliClassification classify(const LatticeSpec& spec, double cs, const BernoulliFunctionH& h, double tol) {
  BernoulliClassification r;
  r.spec = spec;
  r.c_star = cs;
  r.hprime0 = h.prime(spec.lambda1 / cs);
  if (r.hprime0 == 0.0) throw ConfigError("h'(q0) = 0: Bernoulli surfaces are not level sets of q");
  const double Qp = cs + spec.lambda1 * r.hprime0 / (cs * cs);
  if (!(Qp > 0.0)) throw ConfigError("Q'(c*) <= 0");
  r.q_slope = kPi * spec.kappa1() / (2.0 * Qp);
  r.q_shift = fbar(spec.kappa_norm(), spec.d) / spec.d;
  r.Kp_bottom = lortz::K_plus(spec, -spec.d);
  r.Km_bottom = lortz::K_minus(spec, -spec.d);
  r.Kp_top = lortz::K_plus(spec, 0.0);
  r.Km_top = lortz::K_minus(spec, 0.0);
  r.I = {std::min(r.Kp_bottom, r.Km_bottom), std::max(r.Kp_top, r.Km_top)};
  r.I_ring = {std::max(r.Kp_bottom, r.Km_bottom), std::min(r.Kp_top, r.Km_top)};
  const double gap = r.I_ring.hi - r.I_ring.lo;
  r.indeterminate = std::abs(gap) <= tol * std::max(1.0, std::abs(r.I_ring.hi));
  r.tori_exist = !r.indeterminate && gap > 0.0;
  r.conditions = tori_conditions(spec.kappa1(), spec.kappa2(), spec.d);
  if (!r.indeterminate && (r.conditions.raw != r.tori_exist || r.conditions.kappa != r.tori_exist))
    throw NumericalError("tori conditions disagree away from the equality case");
  return r;
}

int crossing_count(const LatticeSpec& s, int samples) {
  int n = 0;
  double prev = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double z = -s.d + s.d * i / (samples - 1.0);
    const double v = K_plus(s, z) - K_minus(s, z);
    if (i > 0 && ((prev < 0.0 && v >= 0.0) || (prev > 0.0 && v <= 0.0))) ++n;
    prev = v;
  }
  return n;
}

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::torus: return "torus";
    case SurfaceKind::annulus: return "annulus";
    default: return "empty";
  }
}

int LevelSurface::count() const { return int(std::count(mask.begin(), mask.end(), char(1))); }

LevelSurface level_surface_q2(const LatticeSpec& spec, double K, int samples) {
  LevelSurface s;
  s.K = K;
  s.x3_floor = -spec.d;
  s.x1 = {0.0};
  s.x2.resize(samples);
  s.psi.assign(samples, kNaN);
  s.mask.assign(samples, 0);
  const double d = spec.d;
  for (int i = 0; i < samples; ++i) {
    const double y = spec.lambda2 * i / (samples - 1.0);
    s.x2[i] = y;
    const double lo = K_profile(spec, y, -d), hi = K_profile(spec, y, 0.0);
    if (K < lo || K > hi) continue;
    s.psi[i] = monotone_root([&](double z) { return K_profile(spec, y, z) - K; },
                             [&](double z) { return K_profile_dx3(spec, y, z); }, -d, 0.0, 1e-12 * d);
    s.mask[i] = 1;
  }
  s.kind = kind_of(s, -d);
  return s;
}

LevelSurface level_surface_full(const BranchPoint& bp, const BernoulliClassification& cls, double K,
                                const FullSurfaceOptions& opt) {
  const GridPtr& gp = bp.tf.q.grid;
  const Grid& g = *gp;
  const double d = g.spec().d;
  const double eps = opt.epsilon_floor > 0.0 ? opt.epsilon_floor : 1e-3 * d;
  const double floor = -d + eps;
  const double target = g.spec().lambda1 / bp.c + cls.q_of_K(K) * bp.t * bp.t;
  const ScalarField& q = bp.tf.q;
  const ScalarField dq = diff(q, 3);
  const int nz = g.nz(), nh = g.nh();
  for (int j = 0; j < nz; ++j) {
    if (g.z()[j] < floor) continue;
    for (int i = 0; i < nh; ++i)
      if (!(dq.v[size_t(j) * nh + i] > 0.0))
        throw OutOfRegimeError("d3 q <= 0 on the slab x3 >= -d + epsilon; level sets are not graphs");
  }
  LevelSurface s;
  s.K = K;
  s.t = bp.t;
  s.x3_floor = floor;
  s.x1 = g.x1();
  s.x2 = g.x2();
  s.psi.assign(nh, kNaN);
  s.mask.assign(nh, 0);
  std::vector<double> w(nz);
  for (int i = 0; i < nh; ++i) {
    auto col = [&](const ScalarField& f, double z) {
      g.vertical_weights(z, w.data());
      double v = 0.0;
      for (int j = 0; j < nz; ++j) v += w[j] * f.v[size_t(j) * nh + i];
      return v;
    };
    auto F = [&](double z) { return col(q, z) - target; };
    if (F(floor) > 0.0 || F(0.0) < 0.0) continue;
    s.psi[i] = monotone_root(F, [&](double z) { return col(dq, z); }, floor, 0.0, opt.tol * d);
    s.mask[i] = 1;
  }
  s.kind = kind_of(s, floor);
  return s;
}

LevelSurface to_physical(const LevelSurface& s, const SurfaceField& eta) {
  LevelSurface r = s;
  r.physical = true;
  if (sup(eta) == 0.0) return r;
  const double d = eta.grid->spec().d;
  if (s.x1.size() == 1 && eta.grid->n1() > 1) {
    // x1-independent surface: spread over the x1 nodes of eta
    r.x1 = eta.grid->x1();
    r.psi.assign(r.x1.size() * s.x2.size(), kNaN);
    r.mask.assign(r.psi.size(), 0);
    for (size_t a = 0; a < r.x1.size(); ++a)
      for (size_t b = 0; b < s.x2.size(); ++b) {
        r.psi[a * s.x2.size() + b] = s.psi[b];
        r.mask[a * s.x2.size() + b] = s.mask[b];
      }
  }
  for (size_t a = 0; a < r.x1.size(); ++a)
    for (size_t b = 0; b < r.x2.size(); ++b) {
      const size_t k = a * r.x2.size() + b;
      if (!r.mask[k]) continue;
      const double e = eval_surface(eta, r.x1[a], r.x2[b]);
      r.psi[k] += e * (1.0 + r.psi[k] / d);
    }
  return r;
}

}  // namespace lortz
