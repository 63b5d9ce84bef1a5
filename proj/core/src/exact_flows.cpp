#include "cpflow/exact_flows.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "cpflow/discretization.hpp"
#include "cpflow/error.hpp"

namespace cpflow {

CouettePoiseuille cp_from_data(double h, double b0, double b1, double F) {
  if (!(h > 0.0)) throw Error(ErrorCode::NonpositiveWidth, "channel width must be positive", h);
  CouettePoiseuille cp;
  cp.h = h;
  cp.b0 = b0;
  cp.b1 = b1;
  cp.F = F;
  cp.A = (3.0 * (b0 + b1) * h - 6.0 * F) / (h * h * h);
  cp.B = (-(4.0 * b0 + 2.0 * b1) * h + 6.0 * F) / (h * h);
  return cp;
}

std::array<double, 2> cp_eval(const CouettePoiseuille& cp, double y) { return {cp.u(y), 0.0}; }

double cp_pressure(const CouettePoiseuille& cp, double x) { return cp.pressure_slope() * x; }

double cp_flux(const CouettePoiseuille& cp) {
  const double h = cp.h;
  return cp.A * h * h * h / 3.0 + cp.B * h * h / 2.0 + cp.b0 * h;
}

StreamProfile stream_profile(const CouettePoiseuille& cp) { return {cp.A / 3.0, cp.B / 2.0, cp.b0}; }

double DiscreteCP::u_at(double y) const {
  int m = static_cast<int>(std::floor(y / delta));
  m = std::clamp(m, 0, n - 1);
  return u[m];
}

DiscreteCP discrete_cp(const CouettePoiseuille& cp, double delta) {
  if (!commensurate(cp.h, delta)) throw Error(ErrorCode::GridMismatch, "width is not a multiple of the spacing", delta);
  DiscreteCP d;
  d.cp = cp;
  d.delta = delta;
  d.n = static_cast<int>(std::lround(cp.h / delta));
  const double h = cp.h;
  d.A = cp.A / (1.0 + 2.0 * delta * delta / (h * h));
  d.B = (cp.b1 - cp.b0 - d.A * h * h) / h;
  d.u.resize(d.n);
  d.stream.assign(d.n + 1, 0.0);
  for (int m = 0; m < d.n; ++m) {
    const double y = (m + 0.5) * delta;
    d.u[m] = (d.A * y + d.B) * y + cp.b0 - 0.25 * d.A * delta * delta;
    d.stream[m + 1] = d.stream[m] + delta * d.u[m];
  }
  return d;
}

CPResidual cp_discrete_residual(const CouettePoiseuille& cp, const MacGrid& grid) {
  const double delta = grid.delta();
  if (!commensurate(cp.h, delta) || std::lround(cp.h / delta) != grid.ny())
    throw Error(ErrorCode::GridMismatch, "grid height does not match the channel width");
  if (static_cast<int>(grid.fluid_cells().size()) != grid.num_cells())
    throw Error(ErrorCode::GridMismatch, "grid is not a straight channel");
  const DiscreteCP d = discrete_cp(cp, delta);
  const double y0 = grid.origin().y, x0 = grid.origin().x;
  WallFn wall = [&](Vec2 p, int comp, bool horizontal) {
    if (!horizontal || comp != 0) return 0.0;
    return std::abs(p.y - y0) < 0.5 * delta ? cp.b0 : cp.b1;
  };
  auto g = std::make_shared<const MacGrid>(grid);
  Discretization disc(g, wall);
  std::vector<double> vel(grid.num_faces(), 0.0), p(grid.num_cells(), 0.0);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i) vel[grid.u_gid(i, j)] = d.u[j];
  for (int c = 0; c < grid.num_cells(); ++c) p[c] = d.pressure_slope() * (grid.cell_center(c).x - x0);
  CPResidual r;
  r.momentum = max_abs(disc.momentum_residual(vel, p, nullptr, 1.0, true));
  r.continuity = max_abs(disc.divergence(vel));
  return r;
}

}  // namespace cpflow
