#pragma once

// Rectilinear admissible domains: a bounded core (union of boxes, possibly
// holding rectangular obstacles) plus J semi-infinite rectangular outlets.
// Truncations cut every outlet at local abscissa t with a flat cap, and
// build_grid() lays a uniform marker-and-cell grid over the truncation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cpflow {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned box [x0, x1] x [y0, y1]. Infinite bounds are allowed for
/// outlet strips.
struct Box {
  double x0{0.0}, y0{0.0}, x1{0.0}, y1{0.0};

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(Vec2 p, double tol = 0.0) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
  bool contains_strictly(Vec2 p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
  /// Interiors intersect with positive area.
  bool overlaps(const Box& o) const {
    return std::min(x1, o.x1) > std::max(x0, o.x0) && std::min(y1, o.y1) > std::max(y0, o.y0);
  }
  friend bool operator==(const Box&, const Box&) = default;
};

enum class Direction { PlusX, MinusX, PlusY, MinusY };

Vec2 unit_vector(Direction d);
std::string to_string(Direction d);
std::optional<Direction> parse_direction(const std::string& s);

/// One outlet. Local frame: e1 = direction, e2 = e1 rotated by +90 degrees,
/// origin at `attach`, so the outlet is {x_l > 0, 0 < y_l < width}.
/// Wall slips are tangential speeds along e1 on the walls y_l = 0 and
/// y_l = width; flux is the signed flux along e1.
struct OutletSpec {
  Direction direction{Direction::PlusX};
  Vec2 attach{};
  double width{1.0};
  double flux{0.0};
  double slip0{0.0};
  double slip1{0.0};

  Vec2 e1() const { return unit_vector(direction); }
  Vec2 e2() const {
    const Vec2 a = e1();
    return {-a.y, a.x};
  }
  Vec2 to_global(double xl, double yl) const { return attach + xl * e1() + yl * e2(); }
  Vec2 to_local(Vec2 p) const {
    const Vec2 d = p - attach;
    return {dot(d, e1()), dot(d, e2())};
  }
  /// Global box of the local rectangle [0, length] x [0, width].
  Box strip(double length) const;
  /// True when the outlet runs along the x axis.
  bool horizontal() const { return direction == Direction::PlusX || direction == Direction::MinusX; }
  friend bool operator==(const OutletSpec&, const OutletSpec&) = default;
};

enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };

/// Boundary velocity on one obstacle side, decomposed along the normal n
/// pointing out of the fluid (into the obstacle) and tau = n rotated by +90.
struct SideData {
  double normal{0.0};
  double tangential{0.0};
  friend bool operator==(const SideData&, const SideData&) = default;
};

struct ObstacleSpec {
  Box box{};
  std::array<SideData, 4> sides{};

  static Vec2 fluid_normal(Side s);
  Vec2 side_velocity(Side s) const;
  double side_length(Side s) const;
  friend bool operator==(const ObstacleSpec&, const ObstacleSpec&) = default;
};

/// Explicit boundary velocity on an axis-aligned piece of the core wall.
struct WallSegment {
  Vec2 a{};
  Vec2 b{};
  Vec2 velocity{};
  bool horizontal() const { return a.y == b.y; }
  bool contains(Vec2 p, double tol) const;
  friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

struct DomainSpec {
  std::vector<Box> core;
  std::vector<OutletSpec> outlets;
  std::vector<ObstacleSpec> obstacles;
  std::vector<WallSegment> core_walls;
  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Where a point sits: in the core (outlet == -1) or in outlet j at local
/// coordinates (x, y) with x > 0.
struct Region {
  int outlet{-1};
  double x{0.0};
  double y{0.0};
};

class ValidatedDomain {
 public:
  const DomainSpec& spec() const { return spec_; }
  const std::vector<OutletSpec>& outlets() const { return spec_.outlets; }
  int num_outlets() const { return static_cast<int>(spec_.outlets.size()); }

  /// Integral of a.n over the core boundary and obstacle sides plus the sum
  /// of outlet fluxes (n points out of the fluid).
  double compatibility_residual() const { return residual_; }
  double compatibility_scale() const { return scale_; }
  /// Largest length q = 1/d with every geometric coordinate a multiple of q.
  double quantum() const { return quantum_; }

  /// Fluid area of the core (obstacles removed).
  double core_area() const { return core_area_; }
  Box core_bounds() const;

  bool in_core(Vec2 p) const;
  bool in_obstacle(Vec2 p) const;
  Region locate(Vec2 p) const;

  /// Boundary velocity a at a wall point. `horizontal_wall` selects between
  /// coincident horizontal and vertical walls at corners.
  Vec2 wall_velocity(Vec2 p, bool horizontal_wall) const;

 private:
  friend ValidatedDomain validate_domain(const DomainSpec& spec);
  DomainSpec spec_;
  double residual_{0.0};
  double scale_{1.0};
  double quantum_{1.0};
  double core_area_{0.0};
};

/// Checks admissibility and the outflow compatibility condition.
/// Throws Error with InvalidSpec / NonpositiveWidth / OverlappingRegions /
/// DisconnectedDomain / FluxIncompatible (value() = residual).
ValidatedDomain validate_domain(const DomainSpec& spec);

/// Compatibility residual without the admissibility checks; used by tests and
/// by the config validator to report the residual before rejecting.
double compatibility_residual(const DomainSpec& spec);

struct CapSegment {
  int outlet{0};
  Vec2 a{};
  Vec2 b{};
  double length{0.0};
};

struct TruncatedDomain {
  ValidatedDomain domain;
  double t{0.0};
  std::vector<CapSegment> caps;

  double area() const;
  bool contains(Vec2 p) const;
  Box bounds() const;
  /// Region test for Omega^s with s <= t: core or outlet abscissa <= s.
  bool in_truncation(Vec2 p, double s, double tol = 1e-9) const;
};

TruncatedDomain truncate(const ValidatedDomain& domain, double t);

enum class CellType : std::uint8_t { Outside, Solid, Fluid };
enum class FaceType : std::uint8_t { Inactive, Interior, Boundary };
enum class BoundaryTag : std::uint8_t { None, Wall, Obstacle, Cap };

/// Uniform staggered grid over a box of nx x ny square cells. Faces carry a
/// global id: u faces (normal x) first, then v faces (normal y).
/// lattice_i/j give the integer offset of the origin on the global lattice,
/// so grids of different truncations with the same spacing align.
class MacGrid {
 public:
  MacGrid() = default;
  MacGrid(int nx, int ny, double delta, int lattice_i, int lattice_j, std::vector<CellType> cells);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double delta() const { return delta_; }
  Vec2 origin() const { return {lattice_i_ * delta_, lattice_j_ * delta_}; }
  int lattice_i() const { return lattice_i_; }
  int lattice_j() const { return lattice_j_; }

  int cell_index(int i, int j) const { return j * nx_ + i; }
  CellType cell(int i, int j) const;
  CellType cell(int c) const { return cells_[c]; }
  bool fluid(int i, int j) const { return cell(i, j) == CellType::Fluid; }
  Vec2 cell_center(int c) const;
  int num_cells() const { return nx_ * ny_; }
  const std::vector<int>& fluid_cells() const { return fluid_cells_; }
  /// Index of a fluid cell among fluid cells, -1 otherwise.
  int fluid_index(int c) const { return fluid_index_[c]; }

  int num_u() const { return (nx_ + 1) * ny_; }
  int num_v() const { return nx_ * (ny_ + 1); }
  int num_faces() const { return num_u() + num_v(); }
  int u_gid(int i, int j) const { return j * (nx_ + 1) + i; }
  int v_gid(int i, int j) const { return num_u() + j * nx_ + i; }
  /// -1 when (i, j) lies outside the face array.
  int u_gid_checked(int i, int j) const;
  int v_gid_checked(int i, int j) const;
  /// 0 for u faces, 1 for v faces.
  int component(int gid) const { return gid < num_u() ? 0 : 1; }
  /// Face (i, j) indices of a global id.
  std::array<int, 2> face_ij(int gid) const;
  Vec2 face_center(int gid) const;
  /// Cells on the low (left/below) and high side of a face; -1 outside.
  std::array<int, 2> face_cells(int gid) const;
  /// Face with the given component whose center is closest to p; -1 if off grid.
  int find_face(Vec2 p, int component) const;
  /// Cell containing p; -1 if off grid.
  int find_cell(Vec2 p) const;

  FaceType face_type(int gid) const { return face_types_[gid]; }
  BoundaryTag boundary_tag(int gid) const { return tags_[gid]; }
  void set_boundary_tag(int gid, BoundaryTag tag) { tags_[gid] = tag; }
  int boundary_outlet(int gid) const { return tag_outlet_[gid]; }
  void set_boundary_outlet(int gid, int j) { tag_outlet_[gid] = j; }

  /// Interior faces are the velocity unknowns, numbered contiguously.
  const std::vector<int>& unknown_faces() const { return unknown_faces_; }
  int unknown_index(int gid) const { return unknown_index_[gid]; }
  const std::vector<int>& boundary_faces() const { return boundary_faces_; }
  /// +1 if the fluid lies on the low side of a boundary face (outward normal
  /// along +axis), -1 otherwise.
  int boundary_orientation(int gid) const;

 private:
  int nx_{0}, ny_{0};
  double delta_{1.0};
  int lattice_i_{0}, lattice_j_{0};
  std::vector<CellType> cells_;
  std::vector<int> fluid_cells_;
  std::vector<int> fluid_index_;
  std::vector<FaceType> face_types_;
  std::vector<BoundaryTag> tags_;
  std::vector<int> tag_outlet_;
  std::vector<int> unknown_faces_;
  std::vector<int> unknown_index_;
  std::vector<int> boundary_faces_;
};

/// True when v is an integer multiple of delta up to a relative 1e-9.
bool commensurate(double v, double delta);

/// Throws NonCommensurateGrid when any geometric length of the truncation is
/// not a multiple of delta.
MacGrid build_grid(const TruncatedDomain& trunc, double delta);

/// Tangential wall data for the ghost-cell closure on a truncated grid:
/// domain wall velocity on walls/obstacles, zero tangential velocity on caps.
/// Returns the velocity component `component` at wall point p.
std::function<double(Vec2, int, bool)> wall_data(const TruncatedDomain& trunc);

/// Faces normal to e1 on the outlet column x_l = x, with quadrature weights
/// (summing to the width) and the sign mapping global to local components.
struct SectionSampler {
  int outlet{0};
  double x{0.0};
  std::vector<int> faces;
  std::vector<double> weights;
  double sign{1.0};

  /// Integral of U . e1 over the section.
  double flux(const std::vector<double>& vel) const;
};

SectionSampler cross_section(const TruncatedDomain& trunc, const MacGrid& grid, int outlet, double x);

/// Plain-text CSV of the cell mask (0 outside, 1 solid, 2 fluid), rows top to
/// bottom.
std::string mask_csv(const MacGrid& grid);

}  // namespace cpflow
