#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "cpflow/config.hpp"
#include "cpflow/diagnostics.hpp"
#include "cpflow/discretization.hpp"
#include "cpflow/ns_solver.hpp"

namespace cpflow::testing {

inline std::string source_path(const std::string& rel) { return std::string(CPFLOW_SOURCE_DIR) + "/" + rel; }

inline DomainSpec bridge_spec(double F = 0.05, double slip = 0.1) {
  DomainSpec s;
  s.core = {{-2, 0, 2, 1}};
  OutletSpec a;
  a.direction = Direction::MinusX;
  a.attach = {-2, 1};
  a.flux = -F;
  a.slip0 = -slip;
  OutletSpec b;
  b.direction = Direction::PlusX;
  b.attach = {2, 0};
  b.flux = F;
  b.slip1 = slip;
  s.outlets = {a, b};
  ObstacleSpec ob;
  ob.box = {-0.5, 0.375, 0.5, 0.625};
  s.obstacles = {ob};
  return s;
}

/// Straight channel of width h through the unit-length core [0,1] x [0,h],
/// Couette-Poiseuille data (b0 at y = 0, b1 at y = h, flux F along +x).
inline DomainSpec channel_spec(double h, double b0, double b1, double F) {
  DomainSpec s;
  s.core = {{0, 0, 1, h}};
  OutletSpec left;
  left.direction = Direction::MinusX;
  left.attach = {0, h};
  left.width = h;
  left.flux = -F;
  left.slip0 = -b1;
  left.slip1 = -b0;
  OutletSpec right;
  right.direction = Direction::PlusX;
  right.attach = {1, 0};
  right.width = h;
  right.flux = F;
  right.slip0 = b0;
  right.slip1 = b1;
  s.outlets = {left, right};
  s.core_walls = {{{0, 0}, {1, 0}, {b0, 0}}, {{0, h}, {1, h}, {b1, 0}}};
  return s;
}

/// Core [0,4]^2 around a 1 x 1 obstacle with a.n = 1/4 on every side and four
/// outlets of widths 2, 1, 1/2, 1/2 carrying F_j = -h_j / 4 (F_1 times
/// `f1_factor`).
inline DomainSpec fountain_spec(double f1_factor = 1.0) {
  DomainSpec s;
  s.core = {{0, 0, 4, 4}};
  auto outlet = [](Direction d, Vec2 at, double h) {
    OutletSpec o;
    o.direction = d;
    o.attach = at;
    o.width = h;
    o.flux = -h / 4.0;
    return o;
  };
  s.outlets = {outlet(Direction::PlusX, {4, 1}, 2.0), outlet(Direction::MinusX, {0, 3}, 1.0),
               outlet(Direction::PlusY, {2, 4}, 0.5), outlet(Direction::MinusY, {1, 0}, 0.5)};
  s.outlets[0].flux *= f1_factor;
  ObstacleSpec ob;
  ob.box = {1.5, 1.5, 2.5, 2.5};
  for (SideData& sd : ob.sides) sd.normal = 0.25;
  s.obstacles = {ob};
  return s;
}

inline std::shared_ptr<const MacGrid> square_grid(int n) {
  return std::make_shared<const MacGrid>(n, n, 1.0 / n, 0, 0, std::vector<CellType>(n * n, CellType::Fluid));
}

/// psi = sin x sin y on the unit square, u = (sin x cos y, -cos x sin y),
/// p = sin(x + y).
struct Manufactured {
  bool convect{true};
  double psi(Vec2 z) const { return std::sin(z.x) * std::sin(z.y); }
  Vec2 u(Vec2 z) const { return {std::sin(z.x) * std::cos(z.y), -std::cos(z.x) * std::sin(z.y)}; }
  double p(Vec2 z) const { return std::sin(z.x + z.y); }
  Vec2 f(Vec2 z) const {
    const Vec2 v = u(z);
    const double gp = std::cos(z.x + z.y);
    Vec2 out{2.0 * v.x + gp, 2.0 * v.y + gp};
    if (convect) {
      out.x += std::sin(z.x) * std::cos(z.x);
      out.y += std::sin(z.y) * std::cos(z.y);
    }
    return out;
  }
};

struct MmsRun {
  double error{0.0};  // discrete L2 velocity error over unknown faces
  SolveResult result;
};

inline MmsRun run_manufactured(int n, bool convect) {
  const Manufactured m{convect};
  auto g = square_grid(n);
  const double d = g->delta();
  auto disc = std::make_shared<Discretization>(g, [m](Vec2 p, int comp, bool) {
    const Vec2 v = m.u(p);
    return comp == 0 ? v.x : v.y;
  });
  std::vector<double> bc(g->num_faces(), 0.0);
  for (int gid : g->boundary_faces()) {
    const auto [i, j] = g->face_ij(gid);
    bc[gid] = g->component(gid) == 0 ? (m.psi({i * d, (j + 1) * d}) - m.psi({i * d, j * d})) / d
                                     : -(m.psi({(i + 1) * d, j * d}) - m.psi({i * d, j * d})) / d;
  }
  const std::vector<double> force = sample_force(*g, [m](Vec2 z) { return m.f(z); });
  MmsRun out;
  if (convect) {
    out.result = solve_steady_ns(NSProblem{disc, bc, force}, SolverOptions{});
  } else {
    ResidualNorms norms;
    out.result.field = solve_stokes(*disc, bc, &force, &norms);
    out.result.u = out.result.field.vel;
    out.result.residual = norms;
  }
  double e2 = 0.0;
  for (int gid : g->unknown_faces()) {
    const Vec2 v = m.u(g->face_center(gid));
    const double e = out.result.u[gid] - (g->component(gid) == 0 ? v.x : v.y);
    e2 += e * e * d * d;
  }
  out.error = std::sqrt(e2);
  return out;
}

}  // namespace cpflow::testing
