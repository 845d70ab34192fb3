#pragma once

// Flattening Pi(x) = x + pi(x) e3 with pi = eta (1 + x3/d), mapping the slab
// onto the fluid domain under the surface eta.

#include <array>
#include <functional>
#include <vector>

#include "lortz/lattice.hpp"

namespace lortz {

struct FlatteningData {
  SurfaceField eta;
  std::array<SurfaceField, 2> grad_eta;
  ScalarField pi;
  VectorField grad_pi;
  ScalarField rho;      // det J = 1 + eta/d, broadcast in x3
  ScalarField inv_rho;

  const GridPtr& grid() const { return eta.grid; }
};

// Throws OutOfRegimeError when rho <= 0 somewhere on the grid.
FlatteningData build_flattening(const SurfaceField& eta);

// Pointwise actions of J = I + e3 (x) grad pi.
VectorField apply_J(const VectorField& f, const FlatteningData& fd, bool dealias = true);
VectorField apply_JT(const VectorField& f, const FlatteningData& fd, bool dealias = true);
VectorField apply_Jinv(const VectorField& f, const FlatteningData& fd, bool dealias = true);
// (1/rho) J^T J f
VectorField apply_M(const VectorField& f, const FlatteningData& fd, bool dealias = true);
// det J computed from grad pi.
ScalarField det_J(const FlatteningData& fd);

// |Omega_0^eta| = integral of rho over the flattened cell.
double physical_volume(const FlatteningData& fd);

struct Point3 {
  double x1, x2, x3;
};

using ScalarFunction = std::function<double(double, double, double)>;
using VectorFunction = std::function<std::array<double, 3>(double, double, double)>;

// Flattened field phi o Pi on the collocation grid.
ScalarField flatten_scalar(const ScalarFunction& phi, const FlatteningData& fd);
// J fbar = rho f(Pi)
VectorField flatten_vector(const VectorFunction& f, const FlatteningData& fd);

// Values at physical points x in Omega^eta, through Pi^{-1}(x) = x - pi(x) e3 / rho.
std::vector<double> unflatten_scalar(const ScalarField& phibar, const FlatteningData& fd,
                                     const std::vector<Point3>& points);
// f = (J fbar / rho) o Pi^{-1}
std::vector<std::array<double, 3>> unflatten_vector(const VectorField& fbar, const FlatteningData& fd,
                                                    const std::vector<Point3>& points);
// Pi^{-1} applied to one physical point.
Point3 inverse_flattening(const Point3& x, const FlatteningData& fd);

// curl((1/rho) J^T J u)
VectorField flattened_curl_operator(const VectorField& u, const FlatteningData& fd);

}  // namespace lortz
