#pragma once

// Couette-Poiseuille channel flows u = (A y^2 + B y + b0, 0), p = 2 A x in
// local outlet coordinates, and their grid-consistent discrete counterparts.

#include <array>
#include <vector>

#include "cpflow/geometry.hpp"

namespace cpflow {

struct CouettePoiseuille {
  double h{1.0};
  double b0{0.0};
  double b1{0.0};
  double F{0.0};
  double A{0.0};
  double B{0.0};

  double pressure_slope() const { return 2.0 * A; }
  double u(double y) const { return (A * y + B) * y + b0; }
  double du(double y) const { return 2.0 * A * y + B; }
};

/// Throws NonpositiveWidth when h <= 0.
CouettePoiseuille cp_from_data(double h, double b0, double b1, double F);

/// Velocity (u, v) at local height y; v is always 0.
std::array<double, 2> cp_eval(const CouettePoiseuille& cp, double y);
double cp_pressure(const CouettePoiseuille& cp, double x);
/// Closed-form flux A h^3/3 + B h^2/2 + b0 h.
double cp_flux(const CouettePoiseuille& cp);

/// Psi(y) = (A/3) y^3 + (B/2) y^2 + b0 y, so Psi' = u and Psi(0) = 0.
struct StreamProfile {
  double c3{0.0};
  double c2{0.0};
  double c1{0.0};

  double operator()(double y) const { return ((c3 * y + c2) * y + c1) * y; }
  double derivative(double y) const { return (3.0 * c3 * y + 2.0 * c2) * y + c1; }
  double second_derivative(double y) const { return 6.0 * c3 * y + 2.0 * c2; }
};

StreamProfile stream_profile(const CouettePoiseuille& cp);

/// Exact steady solution of the staggered equations on a straight channel of
/// n = h / delta cells: cell-row velocities, nodal stream values and the
/// pressure slope. Converges to the continuous flow at second order.
struct DiscreteCP {
  CouettePoiseuille cp;
  double delta{0.0};
  int n{0};
  double A{0.0};
  double B{0.0};
  std::vector<double> u;       // n values at y = (m + 1/2) delta
  std::vector<double> stream;  // n + 1 nodal values, stream[0] = 0, stream[n] = F

  double pressure_slope() const { return 2.0 * A; }
  /// Row value at a local height, rounding to the nearest cell row.
  double u_at(double y) const;
};

/// Throws GridMismatch when h is not a multiple of delta.
DiscreteCP discrete_cp(const CouettePoiseuille& cp, double delta);

struct CPResidual {
  double momentum{0.0};    // max over unknown faces
  double continuity{0.0};  // max over fluid cells
};

/// Applies the discrete Navier-Stokes operator to the discrete
/// Couette-Poiseuille state on a straight channel grid in the local frame
/// (walls at the bottom and top rows, flow along +x). Throws GridMismatch
/// when the grid is not an all-fluid rectangle of height h.
CPResidual cp_discrete_residual(const CouettePoiseuille& cp, const MacGrid& grid);

}  // namespace cpflow
