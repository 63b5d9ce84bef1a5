#pragma once

// Staggered finite differences on a MacGrid: ghost-cell Dirichlet walls,
// centered divergence-form convection, residual evaluation, Jacobians and the
// discrete Dirichlet integral.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "cpflow/geometry.hpp"

namespace cpflow {

/// (wall point, velocity component, wall is horizontal) -> boundary velocity.
using WallFn = std::function<double(Vec2, int, bool)>;

/// Velocity on every face (inactive faces hold 0) and pressure on every
/// cell (non-fluid cells hold 0).
struct StaggeredField {
  std::shared_ptr<const MacGrid> grid;
  std::vector<double> vel;
  std::vector<double> p;

  StaggeredField() = default;
  explicit StaggeredField(std::shared_ptr<const MacGrid> g)
      : grid(std::move(g)), vel(grid->num_faces(), 0.0), p(grid->num_cells(), 0.0) {}
};

enum class NbKind : std::uint8_t { Unknown, Known, Ghost };

struct Neighbor {
  NbKind kind{NbKind::Ghost};
  int gid{-1};       // face id for Unknown / Known
  int unknown{-1};   // unknown index for Unknown
  Vec2 wall{};       // wall point for Ghost
  double a{0.0};     // wall velocity for Ghost
};

enum Dir { East = 0, West = 1, North = 2, South = 3 };

/// Everything an unknown face needs: same-component neighbors, the faces
/// whose average advects through each side of its control volume, and the
/// two pressure cells.
struct FaceStencil {
  int gid{-1};
  int component{0};
  std::array<Neighbor, 4> nb{};
  std::array<std::array<int, 2>, 4> flux_faces{};
  int cell_lo{-1};
  int cell_hi{-1};
};

/// A ghost attached to a boundary face (corner ghosts), kept for the
/// Dirichlet integral.
struct BoundaryGhost {
  int gid{-1};
  Vec2 wall{};
  double a{0.0};
};

enum class Linearization { Stokes, Picard, Newton };

class Discretization {
 public:
  Discretization(std::shared_ptr<const MacGrid> grid, WallFn wall);

  const MacGrid& grid() const { return *grid_; }
  std::shared_ptr<const MacGrid> grid_ptr() const { return grid_; }
  const std::vector<FaceStencil>& stencils() const { return stencils_; }
  const std::vector<BoundaryGhost>& boundary_ghosts() const { return boundary_ghosts_; }
  int num_unknowns() const { return static_cast<int>(stencils_.size()); }
  /// Fluid cell whose pressure is pinned; the first fluid cell by default.
  int pinned_cell() const { return pinned_cell_; }
  void set_pinned_cell(int c) { pinned_cell_ = c; }

  /// Momentum residual -Lap u + C(u)u + G p - f on unknown faces. Ghost
  /// values use `ghost_scale * a`. `convect` toggles the nonlinear term.
  std::vector<double> momentum_residual(const std::vector<double>& vel, const std::vector<double>& p,
                                        const std::vector<double>* force, double ghost_scale,
                                        bool convect) const;
  /// Discrete divergence per fluid cell (indexed like grid.fluid_cells()).
  std::vector<double> divergence(const std::vector<double>& vel) const;

  /// Saddle-point Jacobian with unknowns [velocity unknowns; pressures of
  /// fluid cells except the pinned one]. Continuity rows hold -div so the
  /// Stokes operator is symmetric.
  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& vel, Linearization lin,
                                       double ghost_scale = 1.0) const;
  /// Map between the pressure block and fluid cells.
  int pressure_unknown(int cell) const;
  int num_pressure_unknowns() const { return static_cast<int>(grid_->fluid_cells().size()) - 1; }

  /// Net normal flux out of the fluid through boundary faces.
  double boundary_flux(const std::vector<double>& vel) const;

 private:
  std::shared_ptr<const MacGrid> grid_;
  WallFn wall_;
  std::vector<FaceStencil> stencils_;
  std::vector<BoundaryGhost> boundary_ghosts_;
  int pinned_cell_{-1};
};

/// Delta-weighted discrete L2 norm sqrt(sum v^2 delta^2).
double weighted_norm(const std::vector<double>& v, double delta);
double max_abs(const std::vector<double>& v);

/// Region predicate on positions (face centers and wall points).
using RegionFn = std::function<bool(Vec2)>;

/// Discrete Dirichlet integral sum |grad u|^2 over the face graph restricted
/// to edges with both endpoints in the region. Ghost values use
/// `ghost_scale * a`; pass 0 for perturbations vanishing on the boundary.
double dirichlet_energy(const Discretization& disc, const std::vector<double>& vel, double ghost_scale,
                        const RegionFn& region = {});

}  // namespace cpflow
