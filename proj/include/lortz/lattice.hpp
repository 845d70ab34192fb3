#pragma once

// Lattice parameters, collocation grid, discrete fields and the basic
// differential operators on the flattened slab R^2 x (-d, 0).
//
// Storage is nodal. Horizontal nodes are uniform on one fundamental cell,
// vertical nodes are Chebyshev-Lobatto points ordered from the surface
// (z = 0, index 0) down to the bottom (z = -d, index nz-1).
// 3-D values are laid out as v[(j*n1 + i1)*n2 + i2].

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lortz {

using cplx = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.141592653589793238462643383279;

struct LatticeSpec {
  double lambda1 = kTwoPi;
  double lambda2 = kTwoPi;
  double d = 1.0;
  double g = 1.0;
  double sigma = 1.0;
  int n1 = 16;
  int n2 = 16;
  int nz = 17;

  double kappa1() const { return kTwoPi / lambda1; }
  double kappa2() const { return kTwoPi / lambda2; }
  double kappa_norm() const;

  static LatticeSpec from_wavenumbers(double kappa1, double kappa2, double d, double g,
                                      double sigma, int n1, int n2, int nz);
  // Throws ConfigError.
  void validate() const;
};

enum class SymmetryClass { plus, minus, none };
std::string to_string(SymmetryClass s);
SymmetryClass symmetry_from_string(const std::string& s);

// Parity of one scalar component under x1 -> -x1 and x2 -> -x2.
// +1 even, -1 odd, 0 unknown.
struct Parity {
  int p1 = 0;
  int p2 = 0;
  bool known() const { return p1 != 0 && p2 != 0; }
  bool operator==(const Parity&) const = default;
};

Parity scalar_parity(SymmetryClass s);
std::array<Parity, 3> vector_parity(SymmetryClass s);
SymmetryClass classify_scalar(Parity p);
SymmetryClass classify_vector(const std::array<Parity, 3>& p);

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

// Collocation descriptor plus cached transforms. Immutable once built.
class Grid {
 public:
  explicit Grid(const LatticeSpec& spec);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const LatticeSpec& spec() const { return spec_; }
  int n1() const { return spec_.n1; }
  int n2() const { return spec_.n2; }
  int nz() const { return spec_.nz; }
  int nh() const { return spec_.n1 * spec_.n2; }
  int size() const { return nh() * spec_.nz; }
  int nc() const { return spec_.n2 / 2 + 1; }   // half-spectrum length in k2
  int nspec() const { return spec_.n1 * nc(); }  // half-spectrum size per level

  const std::vector<double>& x1() const { return x1_; }
  const std::vector<double>& x2() const { return x2_; }
  const std::vector<double>& z() const { return z_; }

  // Vertical Chebyshev differentiation matrices (physical scaling).
  const Eigen::MatrixXd& D() const { return D_; }
  const Eigen::MatrixXd& D2() const { return D2_; }
  // Clenshaw-Curtis weights for integration over [-d, 0].
  const std::vector<double>& wz() const { return wz_; }
  // Barycentric weights of the vertical nodes.
  const std::vector<double>& bary() const { return bary_; }

  // Signed mode index in k1 for half-spectrum row i1, k2 index is the column.
  int m1(int i1) const { return i1 <= spec_.n1 / 2 ? (i1 == spec_.n1 / 2 ? -i1 : i1) : i1 - spec_.n1; }
  bool nyquist1(int i1) const { return 2 * i1 == spec_.n1; }
  bool nyquist2(int i2) const { return 2 * i2 == spec_.n2; }
  double k1(int i1) const { return nyquist1(i1) ? 0.0 : m1(i1) * spec_.kappa1(); }
  double k2(int i2) const { return nyquist2(i2) ? 0.0 : i2 * spec_.kappa2(); }

  // Horizontal real-to-half-complex transforms over `levels` stacked n1 x n2
  // planes. Forward output is normalized: f = sum c_k e^{ik.x}.
  void forward(const double* in, cplx* out, int levels) const;
  void inverse(const cplx* in, double* out, int levels) const;

  // Vertical Lagrange interpolation weights at a point z in [-d, 0].
  void vertical_weights(double zq, double* w) const;

 private:
  struct Plans;
  LatticeSpec spec_;
  std::vector<double> x1_, x2_, z_, wz_, bary_;
  Eigen::MatrixXd D_, D2_;
  std::unique_ptr<Plans> plans_;
};

GridPtr make_grid(const LatticeSpec& spec);

// Chebyshev-Lobatto nodes on [-d, 0], surface first. Works for any n >= 2.
std::vector<double> chebyshev_nodes(int n, double d);

// ---------------------------------------------------------------------------
// Fields

struct SurfaceField {
  GridPtr grid;
  std::vector<double> v;  // n1*n2 values, index i1*n2+i2
  Parity par;

  SurfaceField() = default;
  explicit SurfaceField(GridPtr g, Parity p = {});
  double& at(int i1, int i2) { return v[i1 * grid->n2() + i2]; }
  double at(int i1, int i2) const { return v[i1 * grid->n2() + i2]; }
};
using SurfaceProfile = SurfaceField;

struct ScalarField {
  GridPtr grid;
  std::vector<double> v;
  Parity par;

  ScalarField() = default;
  explicit ScalarField(GridPtr g, Parity p = {});
  double& at(int j, int i1, int i2) { return v[(j * grid->n1() + i1) * grid->n2() + i2]; }
  double at(int j, int i1, int i2) const { return v[(j * grid->n1() + i1) * grid->n2() + i2]; }
};

struct VectorField {
  std::array<ScalarField, 3> c;
  bool divergence_free = false;

  VectorField() = default;
  explicit VectorField(GridPtr g, SymmetryClass s = SymmetryClass::none);
  const GridPtr& grid() const { return c[0].grid; }
  ScalarField& operator[](int i) { return c[i]; }
  const ScalarField& operator[](int i) const { return c[i]; }
  SymmetryClass symmetry() const;
};

// Construction from closed forms.
SurfaceField surface_from(GridPtr g, const std::function<double(double, double)>& f, Parity p = {});
ScalarField scalar_from(GridPtr g, const std::function<double(double, double, double)>& f,
                        Parity p = {});
ScalarField constant_scalar(GridPtr g, double value);
VectorField constant_vector(GridPtr g, double a1, double a2, double a3);

// Surface function extended constant in x3.
ScalarField broadcast(const SurfaceField& s);
// Restriction to vertical level j (j = 0 is the surface).
SurfaceField level(const ScalarField& f, int j);

// Arithmetic (parity of the result is derived where it is determined).
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField operator-(const ScalarField& a);
SurfaceField operator+(const SurfaceField& a, const SurfaceField& b);
SurfaceField operator-(const SurfaceField& a, const SurfaceField& b);
SurfaceField operator*(double s, const SurfaceField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);

// Pointwise product on the collocation grid. With dealias = true the
// result is passed through the 2/3-rule filter.
ScalarField mul(const ScalarField& a, const ScalarField& b, bool dealias = true);
SurfaceField mul(const SurfaceField& a, const SurfaceField& b, bool dealias = true);
// Pointwise map of the nodal values (no parity tracking).
ScalarField map(const ScalarField& a, const std::function<double(double)>& f);
SurfaceField map(const SurfaceField& a, const std::function<double(double)>& f);

void dealias(ScalarField& f);
void dealias(SurfaceField& f);
void dealias(VectorField& f);

// ---------------------------------------------------------------------------
// Spectral representation

// Full set of horizontal Fourier coefficients at every level, indexed by the
// signed mode numbers (m1, m2) with m in [-n/2, n/2).
struct Coefficients {
  int n1 = 0, n2 = 0, nz = 0;
  std::vector<cplx> c;  // index ((j*n1 + (m1 mod n1))*n2 + (m2 mod n2))
  cplx at(int m1, int m2, int j) const;
  cplx& at(int m1, int m2, int j);
};

Coefficients coefficients(const ScalarField& f);
Coefficients coefficients(const SurfaceField& f);
ScalarField from_coefficients(GridPtr g, const Coefficients& c, Parity p = {});
SurfaceField surface_from_coefficients(GridPtr g, const Coefficients& c, Parity p = {});

// ---------------------------------------------------------------------------
// Differential operators

ScalarField diff(const ScalarField& f, int direction);
SurfaceField diff(const SurfaceField& f, int direction);
VectorField grad(const ScalarField& f);
ScalarField div(const VectorField& f);
VectorField curl(const VectorField& f);
std::array<SurfaceField, 2> grad(const SurfaceField& f);
SurfaceField laplacian(const SurfaceField& f);
// Inverse of d/dx1 on the x1-mean-free part (x1-mean of the result is zero).
ScalarField integrate_x1(const ScalarField& f);
SurfaceField integrate_x1(const SurfaceField& f);
// Average over x1 at fixed (x2, x3), returned constant in x1.
ScalarField mean_x1(const ScalarField& f);

// Cell averages and norms.
double mean(const ScalarField& f);  // average over the flattened cell
double mean(const SurfaceField& f);
double sup(const ScalarField& f);
double sup(const SurfaceField& f);
double sup(const VectorField& f);
double sup_diff(const ScalarField& a, const ScalarField& b);
double sup_diff(const SurfaceField& a, const SurfaceField& b);
double sup_diff(const VectorField& a, const VectorField& b);

// ---------------------------------------------------------------------------
// Symmetry

ScalarField symmetrize(const ScalarField& f, Parity target);
SurfaceField symmetrize(const SurfaceField& f, Parity target);
VectorField symmetrize(const VectorField& f, SymmetryClass target);
ScalarField symmetrize(const ScalarField& f, SymmetryClass target);
SurfaceField symmetrize(const SurfaceField& f, SymmetryClass target);

// Largest nodal deviation from the target class.
double symmetry_defect(const ScalarField& f, Parity target);
double symmetry_defect(const SurfaceField& f, Parity target);
double symmetry_defect(const VectorField& f, SymmetryClass target);
// Coefficient-level check: max |c(R_j k) - (+-) c(k)| over all modes and levels.
double coefficient_symmetry_defect(const ScalarField& f, Parity target);
double coefficient_symmetry_defect(const SurfaceField& f, Parity target);
double coefficient_symmetry_defect(const VectorField& f, SymmetryClass target);

// sup |f(. + lambda/2) - f| (identical to the lambda*/2 shift modulo Lambda).
double check_diamond_periodicity(const ScalarField& f);
double check_diamond_periodicity(const SurfaceField& f);
double check_diamond_periodicity(const VectorField& f);

// ---------------------------------------------------------------------------
// Off-grid evaluation: exact Fourier sums horizontally, barycentric
// interpolation vertically.

class FieldEvaluator {
 public:
  FieldEvaluator() = default;
  explicit FieldEvaluator(const std::vector<const ScalarField*>& fields);
  int count() const { return nf_; }

  // Values at a single point.
  void eval(double x1, double x2, double x3, double* out) const;

  // Partial sum over k1 at fixed x1; evaluating many points on the plane
  // x1 = const then costs O(n2 * nz) per point and field.
  class Slice {
   public:
    void eval(double x2, double x3, double* out) const;

   private:
    friend class FieldEvaluator;
    const FieldEvaluator* owner_ = nullptr;
    std::vector<cplx> s_;  // [field][j][active i2]
  };
  void slice(double x1, Slice& out) const;

 private:
  GridPtr grid_;
  int nf_ = 0;
  std::vector<int> act1_;  // active half-spectrum rows
  std::vector<int> act2_;  // active half-spectrum columns
  std::vector<cplx> c_;    // [field][j][i1][i2] half spectrum, weighted
};

// Evaluate a surface function at an arbitrary horizontal point.
double eval_surface(const SurfaceField& f, double x1, double x2);

// Evaluate a single 3-D field at a point.
double eval_point(const ScalarField& f, double x1, double x2, double x3);

}  // namespace lortz
