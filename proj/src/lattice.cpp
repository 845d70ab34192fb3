#include "lortz/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "lortz/errors.hpp"

namespace lortz {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Parity combine(Parity a, Parity b) {
  if (a == b) return a;
  return {};
}

Parity product(Parity a, Parity b) { return {a.p1 * b.p1, a.p2 * b.p2}; }

}  // namespace

double LatticeSpec::kappa_norm() const { return std::hypot(kappa1(), kappa2()); }

LatticeSpec LatticeSpec::from_wavenumbers(double kappa1, double kappa2, double d, double g,
                                          double sigma, int n1, int n2, int nz) {
  LatticeSpec s;
  s.lambda1 = kTwoPi / kappa1;
  s.lambda2 = kTwoPi / kappa2;
  s.d = d;
  s.g = g;
  s.sigma = sigma;
  s.n1 = n1;
  s.n2 = n2;
  s.nz = nz;
  return s;
}

void LatticeSpec::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError("lattice: " + m); };
  if (!(lambda1 > 0) || !(lambda2 > 0)) bad("wavelengths must be positive");
  if (!(d > 0)) bad("depth d must be positive");
  if (!(g > 0)) bad("gravity g must be positive");
  if (!(sigma > 0)) bad("surface tension sigma must be positive");
  if (n1 < 8 || n2 < 8) bad("n1, n2 must be at least 8");
  if (n1 % 2 || n2 % 2) bad("n1, n2 must be even");
  if (nz < 9) bad("nz must be at least 9");
}

std::string to_string(SymmetryClass s) {
  switch (s) {
    case SymmetryClass::plus: return "plus";
    case SymmetryClass::minus: return "minus";
    default: return "none";
  }
}

SymmetryClass symmetry_from_string(const std::string& s) {
  if (s == "plus") return SymmetryClass::plus;
  if (s == "minus") return SymmetryClass::minus;
  if (s == "none") return SymmetryClass::none;
  throw ConfigError("unknown symmetry tag '" + s + "'");
}

Parity scalar_parity(SymmetryClass s) {
  switch (s) {
    case SymmetryClass::plus: return {1, 1};
    case SymmetryClass::minus: return {-1, 1};
    default: return {};
  }
}

// f(R_j x) = +-(-1)^j R_j f(x), component by component.
std::array<Parity, 3> vector_parity(SymmetryClass s) {
  switch (s) {
    case SymmetryClass::plus: return {Parity{1, 1}, Parity{-1, -1}, Parity{-1, 1}};
    case SymmetryClass::minus: return {Parity{-1, -1}, Parity{1, 1}, Parity{1, -1}};
    default: return {};
  }
}

SymmetryClass classify_scalar(Parity p) {
  if (p == scalar_parity(SymmetryClass::plus)) return SymmetryClass::plus;
  if (p == scalar_parity(SymmetryClass::minus)) return SymmetryClass::minus;
  return SymmetryClass::none;
}

SymmetryClass classify_vector(const std::array<Parity, 3>& p) {
  if (p == vector_parity(SymmetryClass::plus)) return SymmetryClass::plus;
  if (p == vector_parity(SymmetryClass::minus)) return SymmetryClass::minus;
  return SymmetryClass::none;
}

// ---------------------------------------------------------------------------
// Grid

struct Grid::Plans {
  std::mutex m;
  std::map<int, fftw_plan> fwd, inv;
  ~Plans() {
    for (auto& [k, p] : fwd) fftw_destroy_plan(p);
    for (auto& [k, p] : inv) fftw_destroy_plan(p);
  }
};

std::vector<double> chebyshev_nodes(int n, double d) {
  std::vector<double> z(n);
  for (int j = 0; j < n; ++j) z[j] = 0.5 * d * (std::cos(kPi * j / (n - 1)) - 1.0);
  z[0] = 0.0;
  z[n - 1] = -d;
  return z;
}

Grid::Grid(const LatticeSpec& spec) : spec_(spec), plans_(std::make_unique<Plans>()) {
  spec_.validate();
  const int n1 = spec.n1, n2 = spec.n2, nz = spec.nz, N = nz - 1;
  x1_.resize(n1);
  x2_.resize(n2);
  for (int i = 0; i < n1; ++i) x1_[i] = spec.lambda1 * i / n1;
  for (int i = 0; i < n2; ++i) x2_[i] = spec.lambda2 * i / n2;
  z_ = chebyshev_nodes(nz, spec.d);

  // Differentiation on xi = cos(pi j/N); z = d(xi - 1)/2.
  std::vector<double> xi(nz), c(nz, 1.0);
  for (int j = 0; j < nz; ++j) xi[j] = std::cos(kPi * j / N);
  c[0] = c[N] = 2.0;
  D_ = Eigen::MatrixXd::Zero(nz, nz);
  for (int i = 0; i < nz; ++i)
    for (int j = 0; j < nz; ++j)
      if (i != j) {
        double s = ((i + j) % 2) ? -1.0 : 1.0;
        D_(i, j) = (c[i] / c[j]) * s / (xi[i] - xi[j]);
      }
  for (int i = 0; i < nz; ++i) D_(i, i) = -D_.row(i).sum();
  D_ *= 2.0 / spec.d;
  D2_ = D_ * D_;

  // Clenshaw-Curtis weights on [-1, 1], scaled to [-d, 0].
  wz_.assign(nz, 0.0);
  {
    std::vector<double> v(nz - 2 > 0 ? nz - 2 : 0, 1.0);
    std::vector<double> theta(nz);
    for (int j = 0; j < nz; ++j) theta[j] = kPi * j / N;
    if (N % 2 == 0) {
      wz_[0] = wz_[N] = 1.0 / (N * N - 1.0);
      for (int k = 1; k < N / 2; ++k)
        for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2.0 * k * theta[j]) / (4.0 * k * k - 1);
      for (int j = 1; j < N; ++j) v[j - 1] -= std::cos(N * theta[j]) / (N * N - 1.0);
    } else {
      wz_[0] = wz_[N] = 1.0 / (double(N) * N);
      for (int k = 1; k <= (N - 1) / 2; ++k)
        for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2.0 * k * theta[j]) / (4.0 * k * k - 1);
    }
    for (int j = 1; j < N; ++j) wz_[j] = 2.0 * v[j - 1] / N;
    for (auto& w : wz_) w *= 0.5 * spec.d;
  }

  bary_.resize(nz);
  for (int j = 0; j < nz; ++j) bary_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == N) ? 0.5 : 1.0);
}

Grid::~Grid() {
  std::lock_guard<std::mutex> lk(planner_mutex());
  plans_.reset();
}

GridPtr make_grid(const LatticeSpec& spec) { return std::make_shared<const Grid>(spec); }

void Grid::forward(const double* in, cplx* out, int levels) const {
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lk(plans_->m);
    auto it = plans_->fwd.find(levels);
    if (it == plans_->fwd.end()) {
      std::lock_guard<std::mutex> lk2(planner_mutex());
      int n[2] = {spec_.n1, spec_.n2};
      std::vector<double> a(size_t(nh()) * levels);
      std::vector<cplx> b(size_t(nspec()) * levels);
      p = fftw_plan_many_dft_r2c(2, n, levels, a.data(), nullptr, 1, nh(),
                                 reinterpret_cast<fftw_complex*>(b.data()), nullptr, 1, nspec(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
      plans_->fwd[levels] = p;
    } else {
      p = it->second;
    }
  }
  fftw_execute_dft_r2c(p, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  const double s = 1.0 / nh();
  const size_t total = size_t(nspec()) * levels;
  for (size_t i = 0; i < total; ++i) out[i] *= s;
}

void Grid::inverse(const cplx* in, double* out, int levels) const {
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lk(plans_->m);
    auto it = plans_->inv.find(levels);
    if (it == plans_->inv.end()) {
      std::lock_guard<std::mutex> lk2(planner_mutex());
      int n[2] = {spec_.n1, spec_.n2};
      std::vector<double> a(size_t(nh()) * levels);
      std::vector<cplx> b(size_t(nspec()) * levels);
      p = fftw_plan_many_dft_c2r(2, n, levels, reinterpret_cast<fftw_complex*>(b.data()), nullptr,
                                 1, nspec(), a.data(), nullptr, 1, nh(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
      plans_->inv[levels] = p;
    } else {
      p = it->second;
    }
  }
  std::vector<cplx> scratch(in, in + size_t(nspec()) * levels);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

void Grid::vertical_weights(double zq, double* w) const {
  const int nz = spec_.nz;
  const double xi = 2.0 * zq / spec_.d + 1.0;
  double sum = 0.0;
  for (int j = 0; j < nz; ++j) {
    double xj = std::cos(kPi * j / (nz - 1));
    double dx = xi - xj;
    if (dx == 0.0) {
      std::fill(w, w + nz, 0.0);
      w[j] = 1.0;
      return;
    }
    w[j] = bary_[j] / dx;
    sum += w[j];
  }
  for (int j = 0; j < nz; ++j) w[j] /= sum;
}

// ---------------------------------------------------------------------------
// Fields

SurfaceField::SurfaceField(GridPtr g, Parity p) : grid(std::move(g)), v(grid->nh(), 0.0), par(p) {}
ScalarField::ScalarField(GridPtr g, Parity p) : grid(std::move(g)), v(grid->size(), 0.0), par(p) {}

VectorField::VectorField(GridPtr g, SymmetryClass s) {
  auto p = vector_parity(s);
  for (int i = 0; i < 3; ++i) c[i] = ScalarField(g, p[i]);
}

SymmetryClass VectorField::symmetry() const { return classify_vector({c[0].par, c[1].par, c[2].par}); }

SurfaceField surface_from(GridPtr g, const std::function<double(double, double)>& f, Parity p) {
  SurfaceField s(g, p);
  for (int i1 = 0; i1 < g->n1(); ++i1)
    for (int i2 = 0; i2 < g->n2(); ++i2) s.at(i1, i2) = f(g->x1()[i1], g->x2()[i2]);
  return s;
}

ScalarField scalar_from(GridPtr g, const std::function<double(double, double, double)>& f, Parity p) {
  ScalarField s(g, p);
  for (int j = 0; j < g->nz(); ++j)
    for (int i1 = 0; i1 < g->n1(); ++i1)
      for (int i2 = 0; i2 < g->n2(); ++i2) s.at(j, i1, i2) = f(g->x1()[i1], g->x2()[i2], g->z()[j]);
  return s;
}

ScalarField constant_scalar(GridPtr g, double value) {
  ScalarField s(g, Parity{1, 1});
  std::fill(s.v.begin(), s.v.end(), value);
  return s;
}

VectorField constant_vector(GridPtr g, double a1, double a2, double a3) {
  VectorField f(g);
  double a[3] = {a1, a2, a3};
  for (int i = 0; i < 3; ++i) {
    std::fill(f[i].v.begin(), f[i].v.end(), a[i]);
    f[i].par = a[i] == 0.0 ? vector_parity(SymmetryClass::plus)[i] : Parity{1, 1};
  }
  f.divergence_free = true;
  return f;
}

ScalarField broadcast(const SurfaceField& s) {
  ScalarField f(s.grid, s.par);
  const int nh = s.grid->nh();
  for (int j = 0; j < s.grid->nz(); ++j) std::copy(s.v.begin(), s.v.end(), f.v.begin() + size_t(j) * nh);
  return f;
}

SurfaceField level(const ScalarField& f, int j) {
  SurfaceField s(f.grid, f.par);
  const int nh = f.grid->nh();
  std::copy(f.v.begin() + size_t(j) * nh, f.v.begin() + size_t(j + 1) * nh, s.v.begin());
  return s;
}

namespace {

template <class F>
F binary(const F& a, const F& b, double sb) {
  F r = a;
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] += sb * b.v[i];
  r.par = combine(a.par, b.par);
  return r;
}

template <class F>
F scaled(double s, const F& a) {
  F r = a;
  for (auto& x : r.v) x *= s;
  return r;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return binary(a, b, 1.0); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return binary(a, b, -1.0); }
ScalarField operator*(double s, const ScalarField& a) { return scaled(s, a); }
ScalarField operator-(const ScalarField& a) { return scaled(-1.0, a); }
SurfaceField operator+(const SurfaceField& a, const SurfaceField& b) { return binary(a, b, 1.0); }
SurfaceField operator-(const SurfaceField& a, const SurfaceField& b) { return binary(a, b, -1.0); }
SurfaceField operator*(double s, const SurfaceField& a) { return scaled(s, a); }

VectorField operator+(const VectorField& a, const VectorField& b) {
  VectorField r;
  for (int i = 0; i < 3; ++i) r[i] = a[i] + b[i];
  r.divergence_free = a.divergence_free && b.divergence_free;
  return r;
}
VectorField operator-(const VectorField& a, const VectorField& b) {
  VectorField r;
  for (int i = 0; i < 3; ++i) r[i] = a[i] - b[i];
  r.divergence_free = a.divergence_free && b.divergence_free;
  return r;
}
VectorField operator*(double s, const VectorField& a) {
  VectorField r;
  for (int i = 0; i < 3; ++i) r[i] = s * a[i];
  r.divergence_free = a.divergence_free;
  return r;
}

ScalarField mul(const ScalarField& a, const ScalarField& b, bool da) {
  ScalarField r(a.grid, product(a.par, b.par));
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = a.v[i] * b.v[i];
  if (da) dealias(r);
  return r;
}

SurfaceField mul(const SurfaceField& a, const SurfaceField& b, bool da) {
  SurfaceField r(a.grid, product(a.par, b.par));
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = a.v[i] * b.v[i];
  if (da) dealias(r);
  return r;
}

ScalarField map(const ScalarField& a, const std::function<double(double)>& f) {
  ScalarField r(a.grid);
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = f(a.v[i]);
  return r;
}

SurfaceField map(const SurfaceField& a, const std::function<double(double)>& f) {
  SurfaceField r(a.grid);
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = f(a.v[i]);
  return r;
}

namespace {

// Apply a horizontal Fourier multiplier mult(i1, i2) to `levels` planes.
template <class M>
void apply_multiplier(const Grid& g, const double* in, double* out, int levels, M mult) {
  std::vector<cplx> s(size_t(g.nspec()) * levels);
  g.forward(in, s.data(), levels);
  const int n1 = g.n1(), nc = g.nc();
  for (int l = 0; l < levels; ++l)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < nc; ++i2) s[(size_t(l) * n1 + i1) * nc + i2] *= mult(i1, i2);
  g.inverse(s.data(), out, levels);
}

bool kept(const Grid& g, int i1, int i2) {
  if (g.nyquist1(i1) || g.nyquist2(i2)) return false;
  return 3 * std::abs(g.m1(i1)) <= g.n1() && 3 * i2 <= g.n2();
}

}  // namespace

void dealias(ScalarField& f) {
  const Grid& g = *f.grid;
  apply_multiplier(g, f.v.data(), f.v.data(), g.nz(), [&](int i1, int i2) { return kept(g, i1, i2) ? 1.0 : 0.0; });
}

void dealias(SurfaceField& f) {
  const Grid& g = *f.grid;
  apply_multiplier(g, f.v.data(), f.v.data(), 1, [&](int i1, int i2) { return kept(g, i1, i2) ? 1.0 : 0.0; });
}

void dealias(VectorField& f) {
  for (auto& c : f.c) dealias(c);
}

// ---------------------------------------------------------------------------
// Coefficients

cplx Coefficients::at(int m1, int m2, int j) const {
  int a = ((m1 % n1) + n1) % n1, b = ((m2 % n2) + n2) % n2;
  return c[(size_t(j) * n1 + a) * n2 + b];
}

cplx& Coefficients::at(int m1, int m2, int j) {
  int a = ((m1 % n1) + n1) % n1, b = ((m2 % n2) + n2) % n2;
  return c[(size_t(j) * n1 + a) * n2 + b];
}

namespace {

Coefficients full_coefficients(const Grid& g, const double* v, int levels) {
  const int n1 = g.n1(), n2 = g.n2(), nc = g.nc();
  std::vector<cplx> s(size_t(g.nspec()) * levels);
  g.forward(v, s.data(), levels);
  Coefficients out{n1, n2, levels, std::vector<cplx>(size_t(n1) * n2 * levels)};
  for (int l = 0; l < levels; ++l)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < nc; ++i2) {
        cplx c = s[(size_t(l) * n1 + i1) * nc + i2];
        out.c[(size_t(l) * n1 + i1) * n2 + i2] = c;
        int j1 = (n1 - i1) % n1, j2 = (n2 - i2) % n2;
        out.c[(size_t(l) * n1 + j1) * n2 + j2] = std::conj(c);
      }
  return out;
}

void from_full(const Grid& g, const Coefficients& c, double* v, int levels) {
  const int n1 = g.n1(), n2 = g.n2(), nc = g.nc();
  std::vector<cplx> s(size_t(g.nspec()) * levels);
  for (int l = 0; l < levels; ++l)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < nc; ++i2) {
        // Average the pair to project onto real fields.
        int j1 = (n1 - i1) % n1, j2 = (n2 - i2) % n2;
        cplx a = c.c[(size_t(l) * n1 + i1) * n2 + i2];
        cplx b = c.c[(size_t(l) * n1 + j1) * n2 + j2];
        s[(size_t(l) * n1 + i1) * nc + i2] = 0.5 * (a + std::conj(b));
      }
  g.inverse(s.data(), v, levels);
}

}  // namespace

Coefficients coefficients(const ScalarField& f) { return full_coefficients(*f.grid, f.v.data(), f.grid->nz()); }
Coefficients coefficients(const SurfaceField& f) { return full_coefficients(*f.grid, f.v.data(), 1); }

ScalarField from_coefficients(GridPtr g, const Coefficients& c, Parity p) {
  if (c.n1 != g->n1() || c.n2 != g->n2() || c.nz != g->nz())
    throw ConfigError("coefficient array does not match grid");
  ScalarField f(g, p);
  from_full(*g, c, f.v.data(), g->nz());
  return f;
}

SurfaceField surface_from_coefficients(GridPtr g, const Coefficients& c, Parity p) {
  if (c.n1 != g->n1() || c.n2 != g->n2() || c.nz != 1) throw ConfigError("coefficient array does not match grid");
  SurfaceField f(g, p);
  from_full(*g, c, f.v.data(), 1);
  return f;
}

// ---------------------------------------------------------------------------
// Differential operators

namespace {

Parity flip(Parity p, int dir) {
  if (dir == 1) p.p1 = -p.p1;
  if (dir == 2) p.p2 = -p.p2;
  return p;
}

}  // namespace

ScalarField diff(const ScalarField& f, int dir) {
  const Grid& g = *f.grid;
  ScalarField r(f.grid, flip(f.par, dir));
  if (dir == 1 || dir == 2) {
    apply_multiplier(g, f.v.data(), r.v.data(), g.nz(), [&](int i1, int i2) {
      if (g.nyquist1(i1) || g.nyquist2(i2)) return cplx(0.0);
      return cplx(0.0, dir == 1 ? g.k1(i1) : g.k2(i2));
    });
  } else if (dir == 3) {
    using RM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RM> in(f.v.data(), g.nz(), g.nh());
    Eigen::Map<RM> out(r.v.data(), g.nz(), g.nh());
    out.noalias() = g.D() * in;
  } else {
    throw std::invalid_argument("diff: direction must be 1, 2 or 3");
  }
  return r;
}

SurfaceField diff(const SurfaceField& f, int dir) {
  const Grid& g = *f.grid;
  if (dir != 1 && dir != 2) throw std::invalid_argument("diff: surface direction must be 1 or 2");
  SurfaceField r(f.grid, flip(f.par, dir));
  apply_multiplier(g, f.v.data(), r.v.data(), 1, [&](int i1, int i2) {
    if (g.nyquist1(i1) || g.nyquist2(i2)) return cplx(0.0);
    return cplx(0.0, dir == 1 ? g.k1(i1) : g.k2(i2));
  });
  return r;
}

VectorField grad(const ScalarField& f) {
  VectorField r;
  for (int i = 0; i < 3; ++i) r[i] = diff(f, i + 1);
  return r;
}

ScalarField div(const VectorField& f) {
  ScalarField r = diff(f[0], 1) + diff(f[1], 2) + diff(f[2], 3);
  Parity p = flip(f[0].par, 1);
  if (p == flip(f[1].par, 2) && p == f[2].par) r.par = p;
  return r;
}

VectorField curl(const VectorField& f) {
  VectorField r;
  r[0] = diff(f[2], 2) - diff(f[1], 3);
  r[1] = diff(f[0], 3) - diff(f[2], 1);
  r[2] = diff(f[1], 1) - diff(f[0], 2);
  r.divergence_free = true;
  return r;
}

std::array<SurfaceField, 2> grad(const SurfaceField& f) { return {diff(f, 1), diff(f, 2)}; }

SurfaceField laplacian(const SurfaceField& f) { return diff(diff(f, 1), 1) + diff(diff(f, 2), 2); }

ScalarField integrate_x1(const ScalarField& f) {
  const Grid& g = *f.grid;
  ScalarField r(f.grid, flip(f.par, 1));
  apply_multiplier(g, f.v.data(), r.v.data(), g.nz(), [&](int i1, int i2) {
    if (g.m1(i1) == 0 || g.nyquist1(i1) || g.nyquist2(i2)) return cplx(0.0);
    return cplx(0.0, -1.0 / g.k1(i1));
  });
  return r;
}

SurfaceField integrate_x1(const SurfaceField& f) {
  const Grid& g = *f.grid;
  SurfaceField r(f.grid, flip(f.par, 1));
  apply_multiplier(g, f.v.data(), r.v.data(), 1, [&](int i1, int i2) {
    if (g.m1(i1) == 0 || g.nyquist1(i1) || g.nyquist2(i2)) return cplx(0.0);
    return cplx(0.0, -1.0 / g.k1(i1));
  });
  return r;
}

ScalarField mean_x1(const ScalarField& f) {
  const Grid& g = *f.grid;
  ScalarField r(f.grid, Parity{f.par.p1 == 0 ? 0 : 1, f.par.p2});
  const int n1 = g.n1(), n2 = g.n2();
  for (int j = 0; j < g.nz(); ++j)
    for (int i2 = 0; i2 < n2; ++i2) {
      double s = 0.0;
      for (int i1 = 0; i1 < n1; ++i1) s += f.at(j, i1, i2);
      s /= n1;
      for (int i1 = 0; i1 < n1; ++i1) r.at(j, i1, i2) = s;
    }
  return r;
}

double mean(const ScalarField& f) {
  const Grid& g = *f.grid;
  double s = 0.0;
  for (int j = 0; j < g.nz(); ++j) {
    double h = 0.0;
    for (int i = 0; i < g.nh(); ++i) h += f.v[size_t(j) * g.nh() + i];
    s += g.wz()[j] * h;
  }
  return s / (g.nh() * g.spec().d);
}

double mean(const SurfaceField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s / f.v.size();
}

double sup(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}
double sup(const SurfaceField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}
double sup(const VectorField& f) { return std::max({sup(f[0]), sup(f[1]), sup(f[2])}); }

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}
double sup_diff(const SurfaceField& a, const SurfaceField& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}
double sup_diff(const VectorField& a, const VectorField& b) {
  return std::max({sup_diff(a[0], b[0]), sup_diff(a[1], b[1]), sup_diff(a[2], b[2])});
}

// ---------------------------------------------------------------------------
// Symmetry

namespace {

template <class Get, class Set>
void reflect_average(const Grid& g, int levels, Parity t, Get get, Set set) {
  const int n1 = g.n1(), n2 = g.n2();
  for (int j = 0; j < levels; ++j)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2) {
        int r1 = (n1 - i1) % n1, r2 = (n2 - i2) % n2;
        double s = get(j, i1, i2) + t.p1 * get(j, r1, i2) + t.p2 * get(j, i1, r2) +
                   t.p1 * t.p2 * get(j, r1, r2);
        set(j, i1, i2, 0.25 * s);
      }
}

}  // namespace

ScalarField symmetrize(const ScalarField& f, Parity t) {
  if (!t.known()) return f;
  ScalarField r(f.grid, t);
  reflect_average(*f.grid, f.grid->nz(), t, [&](int j, int a, int b) { return f.at(j, a, b); },
                  [&](int j, int a, int b, double x) { r.at(j, a, b) = x; });
  return r;
}

SurfaceField symmetrize(const SurfaceField& f, Parity t) {
  if (!t.known()) return f;
  SurfaceField r(f.grid, t);
  reflect_average(*f.grid, 1, t, [&](int, int a, int b) { return f.at(a, b); },
                  [&](int, int a, int b, double x) { r.at(a, b) = x; });
  return r;
}

VectorField symmetrize(const VectorField& f, SymmetryClass t) {
  if (t == SymmetryClass::none) return f;
  auto p = vector_parity(t);
  VectorField r;
  for (int i = 0; i < 3; ++i) r[i] = symmetrize(f[i], p[i]);
  r.divergence_free = f.divergence_free;
  return r;
}

ScalarField symmetrize(const ScalarField& f, SymmetryClass t) { return symmetrize(f, scalar_parity(t)); }
SurfaceField symmetrize(const SurfaceField& f, SymmetryClass t) { return symmetrize(f, scalar_parity(t)); }

double symmetry_defect(const ScalarField& f, Parity t) { return sup_diff(f, symmetrize(f, t)); }
double symmetry_defect(const SurfaceField& f, Parity t) { return sup_diff(f, symmetrize(f, t)); }
double symmetry_defect(const VectorField& f, SymmetryClass t) { return sup_diff(f, symmetrize(f, t)); }

namespace {

double coeff_defect(const Coefficients& c, Parity t) {
  double m = 0.0;
  for (int j = 0; j < c.nz; ++j)
    for (int m1 = -c.n1 / 2; m1 < c.n1 / 2; ++m1)
      for (int m2 = -c.n2 / 2; m2 < c.n2 / 2; ++m2) {
        cplx a = c.at(m1, m2, j);
        m = std::max(m, std::abs(c.at(-m1, m2, j) - double(t.p1) * a));
        m = std::max(m, std::abs(c.at(m1, -m2, j) - double(t.p2) * a));
      }
  return m;
}

}  // namespace

double coefficient_symmetry_defect(const ScalarField& f, Parity t) { return coeff_defect(coefficients(f), t); }
double coefficient_symmetry_defect(const SurfaceField& f, Parity t) { return coeff_defect(coefficients(f), t); }
double coefficient_symmetry_defect(const VectorField& f, SymmetryClass t) {
  auto p = vector_parity(t);
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, coefficient_symmetry_defect(f[i], p[i]));
  return m;
}

double check_diamond_periodicity(const ScalarField& f) {
  const Grid& g = *f.grid;
  const int n1 = g.n1(), n2 = g.n2();
  double m = 0.0;
  for (int j = 0; j < g.nz(); ++j)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2) {
        double a = f.at(j, (i1 + n1 / 2) % n1, (i2 + n2 / 2) % n2);
        double b = f.at(j, (i1 + n1 / 2) % n1, (i2 + n2 - n2 / 2) % n2);
        m = std::max({m, std::abs(a - f.at(j, i1, i2)), std::abs(b - f.at(j, i1, i2))});
      }
  return m;
}

double check_diamond_periodicity(const SurfaceField& f) { return check_diamond_periodicity(broadcast(f)); }

double check_diamond_periodicity(const VectorField& f) {
  return std::max({check_diamond_periodicity(f[0]), check_diamond_periodicity(f[1]),
                   check_diamond_periodicity(f[2])});
}

// ---------------------------------------------------------------------------
// Off-grid evaluation

FieldEvaluator::FieldEvaluator(const std::vector<const ScalarField*>& fields) {
  if (fields.empty()) return;
  grid_ = fields[0]->grid;
  const Grid& g = *grid_;
  nf_ = int(fields.size());
  const int nz = g.nz(), n1 = g.n1(), nc = g.nc(), ns = g.nspec();
  c_.assign(size_t(nf_) * nz * ns, 0.0);
  for (int f = 0; f < nf_; ++f) {
    g.forward(fields[f]->v.data(), c_.data() + size_t(f) * nz * ns, nz);
  }
  // Real reconstruction from the half spectrum: interior columns count twice.
  double amax = 0.0;
  for (int f = 0; f < nf_; ++f)
    for (int j = 0; j < nz; ++j)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < nc; ++i2) {
          cplx& c = c_[((size_t(f) * nz + j) * n1 + i1) * nc + i2];
          if (i2 != 0 && !g.nyquist2(i2)) c *= 2.0;
          amax = std::max(amax, std::abs(c));
        }
  const double thr = 1e-17 * amax;
  std::vector<char> r1(n1, 0), r2(nc, 0);
  for (int f = 0; f < nf_; ++f)
    for (int j = 0; j < nz; ++j)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < nc; ++i2)
          if (std::abs(c_[((size_t(f) * nz + j) * n1 + i1) * nc + i2]) > thr) r1[i1] = r2[i2] = 1;
  for (int i = 0; i < n1; ++i)
    if (r1[i]) act1_.push_back(i);
  for (int i = 0; i < nc; ++i)
    if (r2[i]) act2_.push_back(i);
}

void FieldEvaluator::slice(double x1, Slice& out) const {
  const Grid& g = *grid_;
  const int nz = g.nz(), n1 = g.n1(), nc = g.nc();
  const int na = int(act2_.size());
  out.owner_ = this;
  out.s_.assign(size_t(nf_) * nz * na, 0.0);
  std::vector<cplx> e1(act1_.size());
  for (size_t a = 0; a < act1_.size(); ++a) {
    int i1 = act1_[a];
    if (g.nyquist1(i1)) {
      e1[a] = std::cos(0.5 * n1 * g.spec().kappa1() * x1);
    } else {
      double ph = g.m1(i1) * g.spec().kappa1() * x1;
      e1[a] = cplx(std::cos(ph), std::sin(ph));
    }
  }
  for (int f = 0; f < nf_; ++f)
    for (int j = 0; j < nz; ++j) {
      const cplx* row = c_.data() + (size_t(f) * nz + j) * n1 * nc;
      cplx* dst = out.s_.data() + (size_t(f) * nz + j) * na;
      for (size_t a = 0; a < act1_.size(); ++a) {
        const cplx* r = row + size_t(act1_[a]) * nc;
        for (int b = 0; b < na; ++b) dst[b] += r[act2_[b]] * e1[a];
      }
    }
}

void FieldEvaluator::Slice::eval(double x2, double x3, double* out) const {
  const FieldEvaluator& o = *owner_;
  const Grid& g = *o.grid_;
  const int nz = g.nz(), na = int(o.act2_.size()), n2 = g.n2();
  double w[256];
  std::vector<double> wbig;
  double* wz = w;
  if (nz > 256) {
    wbig.resize(nz);
    wz = wbig.data();
  }
  g.vertical_weights(x3, wz);
  cplx e2[160];
  std::vector<cplx> ebig;
  cplx* e = e2;
  if (na > 160) {
    ebig.resize(na);
    e = ebig.data();
  }
  const double k2 = g.spec().kappa2();
  const cplx base(std::cos(k2 * x2), std::sin(k2 * x2));
  // Powers of the base phase; active columns are increasing.
  cplx p(1.0, 0.0);
  int cur = 0;
  for (int b = 0; b < na; ++b) {
    int i2 = o.act2_[b];
    if (g.nyquist2(i2)) {
      e[b] = std::cos(0.5 * n2 * k2 * x2);
      continue;
    }
    while (cur < i2) {
      p *= base;
      ++cur;
    }
    e[b] = p;
  }
  for (int f = 0; f < o.nf_; ++f) {
    double acc = 0.0;
    for (int j = 0; j < nz; ++j) {
      if (wz[j] == 0.0) continue;
      const cplx* s = s_.data() + (size_t(f) * nz + j) * na;
      double re = 0.0;
      for (int b = 0; b < na; ++b) re += s[b].real() * e[b].real() - s[b].imag() * e[b].imag();
      acc += wz[j] * re;
    }
    out[f] = acc;
  }
}

void FieldEvaluator::eval(double x1, double x2, double x3, double* out) const {
  Slice s;
  slice(x1, s);
  s.eval(x2, x3, out);
}

double eval_surface(const SurfaceField& f, double x1, double x2) {
  ScalarField b = broadcast(f);
  FieldEvaluator ev({&b});
  double out;
  ev.eval(x1, x2, 0.0, &out);
  return out;
}

double eval_point(const ScalarField& f, double x1, double x2, double x3) {
  FieldEvaluator ev({&f});
  double out;
  ev.eval(x1, x2, x3, &out);
  return out;
}

}  // namespace lortz
