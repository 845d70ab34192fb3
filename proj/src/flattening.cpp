#include "lortz/flattening.hpp"

#include <cmath>

#include "lortz/errors.hpp"

namespace lortz {

FlatteningData build_flattening(const SurfaceField& eta) {
  const GridPtr& g = eta.grid;
  const double d = g->spec().d;
  FlatteningData fd;
  fd.eta = eta;
  for (double e : eta.v)
    if (!(e + d > 0.0)) throw OutOfRegimeError("flattening: eta + d <= 0, domain degenerates");
  fd.grad_eta = grad(eta);
  auto e3 = broadcast(eta);
  auto lin = scalar_from(g, [d](double, double, double z) { return 1.0 + z / d; }, Parity{1, 1});
  fd.pi = mul(e3, lin, false);
  fd.grad_pi[0] = mul(broadcast(fd.grad_eta[0]), lin, false);
  fd.grad_pi[1] = mul(broadcast(fd.grad_eta[1]), lin, false);
  fd.grad_pi[2] = (1.0 / d) * e3;
  fd.rho = constant_scalar(g, 1.0) + (1.0 / d) * e3;
  fd.rho.par = eta.par;
  fd.inv_rho = map(fd.rho, [](double r) { return 1.0 / r; });
  fd.inv_rho.par = eta.par;
  return fd;
}

namespace {

ScalarField dot_grad_pi(const VectorField& f, const FlatteningData& fd) {
  ScalarField s = mul(fd.grad_pi[0], f[0], false) + mul(fd.grad_pi[1], f[1], false) +
                  mul(fd.grad_pi[2], f[2], false);
  return s;
}

// f + finish(corr): the identity part stays exact, the product part is filtered.
VectorField add_correction(const VectorField& f, VectorField corr, bool da) {
  if (da) dealias(corr);
  VectorField r = f + corr;
  for (int i = 0; i < 3; ++i)
    if (f[i].par.known() && !(corr[i].par == f[i].par)) r[i].par = f[i].par;
  return r;
}

VectorField zero_like(const VectorField& f) {
  VectorField z;
  for (int i = 0; i < 3; ++i) z[i] = ScalarField(f.grid(), f[i].par);
  return z;
}

}  // namespace

VectorField apply_J(const VectorField& f, const FlatteningData& fd, bool da) {
  VectorField c = zero_like(f);
  c[2] = dot_grad_pi(f, fd);
  return add_correction(f, c, da);
}

VectorField apply_JT(const VectorField& f, const FlatteningData& fd, bool da) {
  VectorField c;
  for (int i = 0; i < 3; ++i) c[i] = mul(fd.grad_pi[i], f[2], false);
  return add_correction(f, c, da);
}

VectorField apply_Jinv(const VectorField& f, const FlatteningData& fd, bool da) {
  VectorField c = zero_like(f);
  c[2] = -mul(fd.inv_rho, dot_grad_pi(f, fd), false);
  return add_correction(f, c, da);
}

VectorField apply_M(const VectorField& f, const FlatteningData& fd, bool da) {
  // M f - f = (1/rho - 1) f + (1/rho)(s e3 + w3 grad pi), s = grad pi . f, w3 = f3 + s.
  const ScalarField s = dot_grad_pi(f, fd);
  const ScalarField w3 = f[2] + s;
  const ScalarField a = fd.inv_rho - constant_scalar(f.grid(), 1.0);
  VectorField c;
  for (int i = 0; i < 3; ++i) {
    ScalarField t = mul(fd.grad_pi[i], w3, false);
    if (i == 2) t = t + s;
    c[i] = mul(a, f[i], false) + mul(fd.inv_rho, t, false);
  }
  return add_correction(f, c, da);
}

ScalarField det_J(const FlatteningData& fd) {
  return constant_scalar(fd.grid(), 1.0) + fd.grad_pi[2];
}

double physical_volume(const FlatteningData& fd) {
  const auto& s = fd.grid()->spec();
  return s.lambda1 * s.lambda2 * s.d * mean(fd.rho);
}

ScalarField flatten_scalar(const ScalarFunction& phi, const FlatteningData& fd) {
  const Grid& g = *fd.grid();
  ScalarField r(fd.grid());
  for (int j = 0; j < g.nz(); ++j)
    for (int i1 = 0; i1 < g.n1(); ++i1)
      for (int i2 = 0; i2 < g.n2(); ++i2)
        r.at(j, i1, i2) = phi(g.x1()[i1], g.x2()[i2], g.z()[j] + fd.pi.at(j, i1, i2));
  return r;
}

VectorField flatten_vector(const VectorFunction& f, const FlatteningData& fd) {
  const Grid& g = *fd.grid();
  VectorField r(fd.grid());
  for (int j = 0; j < g.nz(); ++j)
    for (int i1 = 0; i1 < g.n1(); ++i1)
      for (int i2 = 0; i2 < g.n2(); ++i2) {
        auto v = f(g.x1()[i1], g.x2()[i2], g.z()[j] + fd.pi.at(j, i1, i2));
        const double rho = fd.rho.at(j, i1, i2);
        // fbar = rho J^{-1} f(Pi)
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += fd.grad_pi[k].at(j, i1, i2) * v[k];
        r[0].at(j, i1, i2) = rho * v[0];
        r[1].at(j, i1, i2) = rho * v[1];
        r[2].at(j, i1, i2) = rho * v[2] - s;
      }
  return r;
}

Point3 inverse_flattening(const Point3& x, const FlatteningData& fd) {
  const double d = fd.grid()->spec().d;
  const double e = eval_surface(fd.eta, x.x1, x.x2);
  return {x.x1, x.x2, (x.x3 - e) / (1.0 + e / d)};
}

std::vector<double> unflatten_scalar(const ScalarField& phibar, const FlatteningData& fd,
                                     const std::vector<Point3>& points) {
  const double d = fd.grid()->spec().d;
  ScalarField eb = broadcast(fd.eta);
  FieldEvaluator ee({&eb});
  FieldEvaluator pe({&phibar});
  std::vector<double> out(points.size());
  for (size_t p = 0; p < points.size(); ++p) {
    const auto& x = points[p];
    double e;
    ee.eval(x.x1, x.x2, 0.0, &e);
    const double zb = (x.x3 - e) / (1.0 + e / d);
    pe.eval(x.x1, x.x2, zb, &out[p]);
  }
  return out;
}

std::vector<std::array<double, 3>> unflatten_vector(const VectorField& fbar, const FlatteningData& fd,
                                                    const std::vector<Point3>& points) {
  const double d = fd.grid()->spec().d;
  ScalarField eb = broadcast(fd.eta);
  FieldEvaluator ev({&eb, &fbar[0], &fbar[1], &fbar[2], &fd.grad_pi[0], &fd.grad_pi[1], &fd.grad_pi[2]});
  std::vector<std::array<double, 3>> out(points.size());
  double e;
  double v[7];
  for (size_t p = 0; p < points.size(); ++p) {
    const auto& x = points[p];
    ev.eval(x.x1, x.x2, 0.0, v);
    e = v[0];
    const double rho = 1.0 + e / d;
    const double zb = (x.x3 - e) / rho;
    ev.eval(x.x1, x.x2, zb, v);
    const double s = v[4] * v[1] + v[5] * v[2] + v[6] * v[3];
    out[p] = {v[1] / rho, v[2] / rho, (v[3] + s) / rho};
  }
  return out;
}

VectorField flattened_curl_operator(const VectorField& u, const FlatteningData& fd) {
  return curl(apply_M(u, fd));
}

}  // namespace lortz
