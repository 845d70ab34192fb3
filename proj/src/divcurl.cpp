#include "lortz/divcurl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "lortz/errors.hpp"

namespace lortz {

namespace {

using LU = Eigen::PartialPivLU<Eigen::MatrixXd>;

// (D^2 - K2) with Dirichlet rows at both planes; cached by (d, nz, K2).
const LU& dirichlet_lu(const Grid& g, double K2) {
  static std::mutex m;
  static std::map<std::tuple<double, int, double>, std::unique_ptr<LU>> cache;
  std::lock_guard<std::mutex> lk(m);
  auto key = std::make_tuple(g.spec().d, g.nz(), K2);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  const int nz = g.nz();
  Eigen::MatrixXd A = g.D2() - K2 * Eigen::MatrixXd::Identity(nz, nz);
  A.row(0).setZero();
  A(0, 0) = 1.0;
  A.row(nz - 1).setZero();
  A(nz - 1, nz - 1) = 1.0;
  auto lu = std::make_unique<LU>(A);
  const LU& ref = *lu;
  cache.emplace(key, std::move(lu));
  return ref;
}

// D with the bottom row replaced by the condition F(-d) = 0.
const LU& antiderivative_lu(const Grid& g) {
  static std::mutex m;
  static std::map<std::tuple<double, int>, std::unique_ptr<LU>> cache;
  std::lock_guard<std::mutex> lk(m);
  auto key = std::make_tuple(g.spec().d, g.nz());
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  const int nz = g.nz();
  Eigen::MatrixXd A = g.D();
  A.row(nz - 1).setZero();
  A(nz - 1, nz - 1) = 1.0;
  auto lu = std::make_unique<LU>(A);
  const LU& ref = *lu;
  cache.emplace(key, std::move(lu));
  return ref;
}

bool is_flat(const FlatteningData& fd) { return sup(fd.eta) == 0.0; }

}  // namespace

CurlMean apply_C(const VectorField& f, const FlatteningData& fd, double bc_tol) {
  const Grid& g = *f.grid();
  const int nh = g.nh(), nz = g.nz();
  double bc = 0.0;
  for (int i = 0; i < nh; ++i)
    bc = std::max({bc, std::abs(f[2].v[i]), std::abs(f[2].v[size_t(nz - 1) * nh + i])});
  if (bc > bc_tol * std::max(1.0, sup(f)))
    throw ConfigError("apply_C: f3 does not vanish on the boundary (max " + std::to_string(bc) + ")");
  CurlMean r;
  r.g = is_flat(fd) ? curl(f) : curl(apply_M(f, fd));
  r.c = mean(f[0]) / mean(fd.rho);
  return r;
}

VectorField invert_C0(const VectorField& gin, double c) {
  const GridPtr& gp = gin.grid();
  const Grid& g = *gp;
  const int nz = g.nz(), n1 = g.n1(), nc = g.nc(), ns = g.nspec();
  std::array<std::vector<cplx>, 3> G, F;
  for (int i = 0; i < 3; ++i) {
    G[i].resize(size_t(ns) * nz);
    F[i].assign(size_t(ns) * nz, 0.0);
    g.forward(gin[i].v.data(), G[i].data(), nz);
  }
  const Eigen::MatrixXd& D = g.D();
  Eigen::MatrixXd rhs(nz, 2), sol(nz, 2), g3(nz, 2), Df3(nz, 2);
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < nc; ++i2) {
      if (g.nyquist1(i1) || g.nyquist2(i2)) continue;
      const size_t off = size_t(i1) * nc + i2;
      auto at = [&](const std::vector<cplx>& v, int j) { return v[off + size_t(j) * ns]; };
      if (i1 == 0 && i2 == 0) {
        // f1 = c + F - <F> with D F = g2, and f2 = -(G - <G>) with D G = g1.
        const LU& lu = antiderivative_lu(g);
        for (int j = 0; j < nz; ++j) {
          rhs(j, 0) = at(G[1], j).real();
          rhs(j, 1) = at(G[0], j).real();
        }
        rhs(nz - 1, 0) = rhs(nz - 1, 1) = 0.0;
        sol = lu.solve(rhs);
        double m0 = 0.0, m1 = 0.0;
        for (int j = 0; j < nz; ++j) {
          m0 += g.wz()[j] * sol(j, 0);
          m1 += g.wz()[j] * sol(j, 1);
        }
        m0 /= g.spec().d;
        m1 /= g.spec().d;
        for (int j = 0; j < nz; ++j) {
          F[0][off + size_t(j) * ns] = c + (sol(j, 0) - m0);
          F[1][off + size_t(j) * ns] = -(sol(j, 1) - m1);
        }
        continue;
      }
      const double k1 = g.k1(i1), k2 = g.k2(i2), K2 = k1 * k1 + k2 * k2;
      const cplx a(0.0, k1), b(0.0, k2);
      for (int j = 0; j < nz; ++j) {
        cplx r = -(a * at(G[1], j) - b * at(G[0], j));
        rhs(j, 0) = r.real();
        rhs(j, 1) = r.imag();
        g3(j, 0) = at(G[2], j).real();
        g3(j, 1) = at(G[2], j).imag();
      }
      rhs(0, 0) = rhs(0, 1) = rhs(nz - 1, 0) = rhs(nz - 1, 1) = 0.0;
      sol = dirichlet_lu(g, K2).solve(rhs);
      if (!sol.allFinite())
        throw NumericalError("invert_C0: vertical solve failed at mode (" + std::to_string(g.m1(i1)) + ", " +
                             std::to_string(i2) + ")");
      Df3.noalias() = D * sol;
      for (int j = 0; j < nz; ++j) {
        const cplx f3(sol(j, 0), sol(j, 1)), df3(Df3(j, 0), Df3(j, 1)), h3(g3(j, 0), g3(j, 1));
        F[0][off + size_t(j) * ns] = (a * df3 + b * h3) / K2;
        F[1][off + size_t(j) * ns] = (b * df3 - a * h3) / K2;
        F[2][off + size_t(j) * ns] = f3;
      }
      F[2][off] = 0.0;
      F[2][off + size_t(nz - 1) * ns] = 0.0;
    }
  // Parity pattern of the preimage of a (-)-field is (+).
  const bool minus = gin.symmetry() == SymmetryClass::minus;
  VectorField f(gp, minus ? SymmetryClass::plus : SymmetryClass::none);
  for (int i = 0; i < 3; ++i) g.inverse(F[i].data(), f[i].v.data(), nz);
  f.divergence_free = true;
  return f;
}

DivCurlResult invert_C(const VectorField& g, double c, const FlatteningData& fd, const DivCurlOptions& opt,
                       const VectorField* warm) {
  DivCurlResult r;
  const bool sym = g.symmetry() == SymmetryClass::minus && fd.eta.par == Parity{1, 1};
  if (is_flat(fd) && !warm) {
    r.f = invert_C0(g, c);
    r.iterations = 1;
    return r;
  }
  r.f = warm ? *warm : invert_C0(g, c);
  double prev = 0.0, first = 0.0;
  int growth = 0, stalls = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    CurlMean a = apply_C(r.f, fd);
    VectorField res = g - a.g;
    if (sym) res = symmetrize(res, SymmetryClass::minus);
    VectorField df = invert_C0(res, c - a.c);
    r.f = r.f + df;
    const double un = sup(df) / std::max(sup(r.f), 1e-300);
    const double ratio = prev > 0.0 ? un / prev : 0.0;
    if (it == 1) first = un;
    // near the round-off floor updates fluctuate; neither growth nor stalls count as failure there
    const bool floor = un < 1e2 * opt.tol;
    if (it > 1 && un > prev && !floor) ++growth; else growth = 0;
    stalls = floor && ratio > 0.9 ? stalls + 1 : 0;
    if (it > 2 && prev > 1e3 * opt.tol) r.contraction = std::max(r.contraction, ratio);
    if (opt.log) opt.log(it, un, ratio);
    r.iterations = it;
    r.update_norm = un;
    if (un < opt.tol || stalls >= 3 || (floor && it == opt.max_iter)) break;
    if (!std::isfinite(un) || growth >= 5 || (it > 3 && un > 1e3 * std::max(first, 1e-300)))
      throw OutOfRegimeError("invert_C: Neumann iteration does not contract (ratio " + std::to_string(ratio) +
                             "), surface amplitude too large");
    if (it == opt.max_iter)
      throw OutOfRegimeError("invert_C: iteration cap reached with update " + std::to_string(un));
    prev = un;
  }
  if (sym) r.f = symmetrize(r.f, SymmetryClass::plus);
  r.f.divergence_free = true;
  return r;
}

DivCurlResult ufrak(const FlatteningData& fd, const DivCurlOptions& opt, const VectorField* warm) {
  VectorField zero(fd.grid(), SymmetryClass::minus);
  return invert_C(zero, 1.0, fd, opt, warm);
}

double frak_f(double k, double z, double d) {
  // cosh(k(z+d))/(k sinh(kd)) without overflow
  const double e = std::exp(-2.0 * k * d);
  return (std::exp(k * z) + std::exp(-k * (z + 2.0 * d))) / (k * (1.0 - e));
}

double frak_fp(double k, double z, double d) {
  const double e = std::exp(-2.0 * k * d);
  return (std::exp(k * z) - std::exp(-k * (z + 2.0 * d))) / (1.0 - e);
}

ScalarField chi(const SurfaceField& eta_dot) {
  const GridPtr& gp = eta_dot.grid;
  const Grid& g = *gp;
  const int nz = g.nz(), n1 = g.n1(), nc = g.nc(), ns = g.nspec();
  const double d = g.spec().d;
  std::vector<cplx> s(ns), out(size_t(ns) * nz, 0.0);
  g.forward(eta_dot.v.data(), s.data(), 1);
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < nc; ++i2) {
      if (g.nyquist1(i1) || g.nyquist2(i2) || (i1 == 0 && i2 == 0)) continue;
      const double k = std::hypot(g.k1(i1), g.k2(i2));
      const size_t off = size_t(i1) * nc + i2;
      for (int j = 0; j < nz; ++j) out[off + size_t(j) * ns] = s[off] * frak_f(k, g.z()[j], d);
    }
  ScalarField r(gp, eta_dot.par);
  g.inverse(out.data(), r.v.data(), nz);
  return r;
}

VectorField D_ufrak0(const SurfaceField& eta_dot) {
  const GridPtr& gp = eta_dot.grid;
  const double d = gp->spec().d;
  auto lin = scalar_from(gp, [d](double, double, double z) { return 1.0 + z / d; }, Parity{1, 1});
  VectorField w = grad(diff(chi(eta_dot), 1));
  w[0] = w[0] + (1.0 / d) * broadcast(eta_dot);
  w[2] = w[2] - mul(broadcast(diff(eta_dot, 1)), lin, false);
  w.divergence_free = true;
  return w;
}

MatrixField B_form(const SurfaceField& eta_dot) {
  const GridPtr& gp = eta_dot.grid;
  const double d = gp->spec().d;
  auto lin = scalar_from(gp, [d](double, double, double z) { return 1.0 + z / d; }, Parity{1, 1});
  std::array<ScalarField, 3> gp_;
  auto ge = grad(eta_dot);
  gp_[0] = mul(broadcast(ge[0]), lin, false);
  gp_[1] = mul(broadcast(ge[1]), lin, false);
  gp_[2] = (1.0 / d) * broadcast(eta_dot);
  const ScalarField diag = (-1.0 / d) * broadcast(eta_dot);
  MatrixField B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      ScalarField v(gp);
      if (i == 2) v = v + gp_[j];
      if (j == 2) v = v + gp_[i];
      if (i == j) v = v + diag;
      B[i][j] = v;
    }
  return B;
}

VectorField apply_matrix(const MatrixField& B, const VectorField& f, bool da) {
  VectorField r;
  for (int i = 0; i < 3; ++i) {
    ScalarField s = mul(B[i][0], f[0], false) + mul(B[i][1], f[1], false) + mul(B[i][2], f[2], false);
    if (da) dealias(s);
    r[i] = s;
  }
  return r;
}

}  // namespace lortz
