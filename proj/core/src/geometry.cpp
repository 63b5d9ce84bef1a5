#include "cpflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "cpflow/error.hpp"

namespace cpflow {

namespace {

constexpr double kTol = 1e-9;

bool near(double a, double b, double tol = kTol) { return std::abs(a - b) <= tol; }

std::vector<double> coordinates(const DomainSpec& spec) {
  std::vector<double> v;
  for (const Box& b : spec.core) v.insert(v.end(), {b.x0, b.y0, b.x1, b.y1});
  for (const ObstacleSpec& o : spec.obstacles) v.insert(v.end(), {o.box.x0, o.box.y0, o.box.x1, o.box.y1});
  for (const OutletSpec& o : spec.outlets) v.insert(v.end(), {o.attach.x, o.attach.y, o.width});
  return v;
}

// Rasterization of the core on the coarsest lattice that resolves every
// coordinate of the spec.
struct Raster {
  double q{1.0};
  double x0{0.0}, y0{0.0};
  int nx{0}, ny{0};
  std::vector<CellType> cells;

  Vec2 center(int i, int j) const { return {x0 + (i + 0.5) * q, y0 + (j + 0.5) * q}; }
  CellType at(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return CellType::Outside;
    return cells[static_cast<std::size_t>(j) * nx + i];
  }
};

double find_quantum(const DomainSpec& spec) {
  const std::vector<double> v = coordinates(spec);
  for (int d = 1; d <= 1024; ++d) {
    bool ok = true;
    for (double c : v) {
      const double r = c * d;
      if (std::abs(r - std::round(r)) > kTol * std::max(1.0, std::abs(r))) {
        ok = false;
        break;
      }
    }
    if (ok) return 1.0 / d;
  }
  throw Error(ErrorCode::InvalidSpec, "geometry coordinates are not rational with denominator <= 1024");
}

bool in_any(const std::vector<Box>& boxes, Vec2 p) {
  for (const Box& b : boxes)
    if (b.contains(p)) return true;
  return false;
}

Vec2 wall_velocity_of(const DomainSpec& spec, Vec2 p, bool horizontal) {
  for (const WallSegment& w : spec.core_walls)
    if (w.horizontal() == horizontal && w.contains(p, kTol)) return w.velocity;
  for (const ObstacleSpec& o : spec.obstacles) {
    const Box& b = o.box;
    if (horizontal) {
      if (p.x >= b.x0 - kTol && p.x <= b.x1 + kTol) {
        if (near(p.y, b.y0)) return o.side_velocity(Side::Bottom);
        if (near(p.y, b.y1)) return o.side_velocity(Side::Top);
      }
    } else if (p.y >= b.y0 - kTol && p.y <= b.y1 + kTol) {
      if (near(p.x, b.x0)) return o.side_velocity(Side::Left);
      if (near(p.x, b.x1)) return o.side_velocity(Side::Right);
    }
  }
  for (int pass = 0; pass < 2; ++pass)
    for (const OutletSpec& o : spec.outlets) {
      if (o.horizontal() != horizontal) continue;
      const Vec2 l = o.to_local(p);
      if (pass == 0 && l.x < -kTol) continue;
      if (near(l.y, 0.0)) return o.slip0 * o.e1();
      if (near(l.y, o.width)) return o.slip1 * o.e1();
    }
  return {0.0, 0.0};
}

Raster rasterize(const DomainSpec& spec, double q) {
  Raster r;
  r.q = q;
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const Box& b : spec.core) {
    x0 = std::min(x0, b.x0);
    y0 = std::min(y0, b.y0);
    x1 = std::max(x1, b.x1);
    y1 = std::max(y1, b.y1);
  }
  r.x0 = x0;
  r.y0 = y0;
  r.nx = static_cast<int>(std::lround((x1 - x0) / q));
  r.ny = static_cast<int>(std::lround((y1 - y0) / q));
  if (static_cast<double>(r.nx) * r.ny > 1.6e7)
    throw Error(ErrorCode::InvalidSpec, "core too large for the geometry lattice");
  r.cells.assign(static_cast<std::size_t>(r.nx) * r.ny, CellType::Outside);
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      const Vec2 c = r.center(i, j);
      CellType t = CellType::Outside;
      if (in_any(spec.core, c)) {
        t = CellType::Fluid;
        for (const ObstacleSpec& o : spec.obstacles)
          if (o.box.contains(c)) t = CellType::Solid;
      }
      r.cells[static_cast<std::size_t>(j) * r.nx + i] = t;
    }
  return r;
}

int count_components(const Raster& r) {
  std::vector<char> seen(r.cells.size(), 0);
  int comps = 0;
  for (int s = 0; s < static_cast<int>(r.cells.size()); ++s) {
    if (r.cells[s] != CellType::Fluid || seen[s]) continue;
    ++comps;
    std::queue<int> qu;
    qu.push(s);
    seen[s] = 1;
    while (!qu.empty()) {
      const int c = qu.front();
      qu.pop();
      const int i = c % r.nx, j = c / r.nx;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int a = i + di[k], b = j + dj[k];
        if (r.at(a, b) != CellType::Fluid) continue;
        const int n = b * r.nx + a;
        if (!seen[n]) {
          seen[n] = 1;
          qu.push(n);
        }
      }
    }
  }
  return comps;
}

double outer_flux(const DomainSpec& spec, const Raster& r, double* scale) {
  // Normal flux of a through the core walls, obstacles and outlet mouths.
  double sum = 0.0, mag = 0.0;
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      if (r.at(i, j) != CellType::Fluid) continue;
      for (int k = 0; k < 4; ++k) {
        const CellType nb = r.at(i + di[k], j + dj[k]);
        if (nb != CellType::Outside) continue;
        const Vec2 n{static_cast<double>(di[k]), static_cast<double>(dj[k])};
        const Vec2 p = r.center(i, j) + (0.5 * r.q) * n;
        bool mouth = false;
        for (const OutletSpec& o : spec.outlets) {
          const Vec2 l = o.to_local(p);
          if (near(l.x, 0.0) && l.y > 0.0 && l.y < o.width) mouth = true;
        }
        if (mouth) continue;
        const double an = dot(wall_velocity_of(spec, p, dj[k] != 0), n) * r.q;
        sum += an;
        mag += std::abs(an);
      }
    }
  for (const ObstacleSpec& o : spec.obstacles)
    for (int s = 0; s < 4; ++s) {
      const double an = o.sides[s].normal * o.side_length(static_cast<Side>(s));
      sum += an;
      mag += std::abs(an);
    }
  for (const OutletSpec& o : spec.outlets) {
    sum += o.flux;
    mag += std::abs(o.flux);
  }
  if (scale) *scale = std::max(1.0, mag);
  return sum;
}

}  // namespace

Vec2 unit_vector(Direction d) {
  switch (d) {
    case Direction::PlusX: return {1.0, 0.0};
    case Direction::MinusX: return {-1.0, 0.0};
    case Direction::PlusY: return {0.0, 1.0};
    case Direction::MinusY: return {0.0, -1.0};
  }
  return {1.0, 0.0};
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::PlusX: return "+x";
    case Direction::MinusX: return "-x";
    case Direction::PlusY: return "+y";
    case Direction::MinusY: return "-y";
  }
  return "+x";
}

std::optional<Direction> parse_direction(const std::string& s) {
  if (s == "+x" || s == "x") return Direction::PlusX;
  if (s == "-x") return Direction::MinusX;
  if (s == "+y" || s == "y") return Direction::PlusY;
  if (s == "-y") return Direction::MinusY;
  return std::nullopt;
}

Box OutletSpec::strip(double length) const {
  const Vec2 a = attach;
  const Vec2 b = to_global(length, width);
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
}

Vec2 ObstacleSpec::fluid_normal(Side s) {
  switch (s) {
    case Side::Left: return {1.0, 0.0};
    case Side::Right: return {-1.0, 0.0};
    case Side::Bottom: return {0.0, 1.0};
    case Side::Top: return {0.0, -1.0};
  }
  return {};
}

Vec2 ObstacleSpec::side_velocity(Side s) const {
  const Vec2 n = fluid_normal(s);
  const Vec2 tau{-n.y, n.x};
  const SideData& d = sides[static_cast<int>(s)];
  return d.normal * n + d.tangential * tau;
}

double ObstacleSpec::side_length(Side s) const {
  return (s == Side::Left || s == Side::Right) ? box.height() : box.width();
}

bool WallSegment::contains(Vec2 p, double tol) const {
  if (horizontal())
    return near(p.y, a.y, tol) && p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol;
  return near(p.x, a.x, tol) && p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

Box ValidatedDomain::core_bounds() const {
  Box r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Box& b : spec_.core) {
    r.x0 = std::min(r.x0, b.x0);
    r.y0 = std::min(r.y0, b.y0);
    r.x1 = std::max(r.x1, b.x1);
    r.y1 = std::max(r.y1, b.y1);
  }
  return r;
}

bool ValidatedDomain::in_obstacle(Vec2 p) const {
  for (const ObstacleSpec& o : spec_.obstacles)
    if (o.box.contains_strictly(p)) return true;
  return false;
}

bool ValidatedDomain::in_core(Vec2 p) const { return in_any(spec_.core, p) && !in_obstacle(p); }

Region ValidatedDomain::locate(Vec2 p) const {
  for (int j = 0; j < num_outlets(); ++j) {
    const OutletSpec& o = spec_.outlets[j];
    const Vec2 l = o.to_local(p);
    if (l.x > kTol && l.y >= -kTol && l.y <= o.width + kTol) return {j, l.x, l.y};
  }
  return {-1, p.x, p.y};
}

Vec2 ValidatedDomain::wall_velocity(Vec2 p, bool horizontal_wall) const {
  return wall_velocity_of(spec_, p, horizontal_wall);
}

double compatibility_residual(const DomainSpec& spec) {
  const Raster r = rasterize(spec, find_quantum(spec));
  return outer_flux(spec, r, nullptr);
}

ValidatedDomain validate_domain(const DomainSpec& spec) {
  if (spec.core.empty()) throw Error(ErrorCode::InvalidSpec, "core has no boxes");
  if (spec.outlets.empty()) throw Error(ErrorCode::InvalidSpec, "domain needs at least one outlet");
  for (const Box& b : spec.core)
    if (!(b.width() > 0.0 && b.height() > 0.0)) throw Error(ErrorCode::InvalidSpec, "degenerate core box");
  for (const ObstacleSpec& o : spec.obstacles)
    if (!(o.box.width() > 0.0 && o.box.height() > 0.0))
      throw Error(ErrorCode::InvalidSpec, "degenerate obstacle box");
  for (std::size_t j = 0; j < spec.outlets.size(); ++j)
    if (!(spec.outlets[j].width > 0.0))
      throw Error(ErrorCode::NonpositiveWidth, "outlet " + std::to_string(j) + " has width <= 0",
                  spec.outlets[j].width);

  const double q = find_quantum(spec);
  const Raster r = rasterize(spec, q);
  const Box bounds{r.x0, r.y0, r.x0 + r.nx * q, r.y0 + r.ny * q};
  const double far = 1e6 + bounds.width() + bounds.height();

  for (std::size_t a = 0; a < spec.obstacles.size(); ++a) {
    const Box& ob = spec.obstacles[a].box;
    for (std::size_t b = a + 1; b < spec.obstacles.size(); ++b) {
      const Box& o2 = spec.obstacles[b].box;
      if (ob.x0 <= o2.x1 && o2.x0 <= ob.x1 && ob.y0 <= o2.y1 && o2.y0 <= ob.y1)
        throw Error(ErrorCode::OverlappingRegions, "obstacles " + std::to_string(a) + " and " +
                                                       std::to_string(b) + " intersect");
    }
    for (const OutletSpec& o : spec.outlets)
      if (ob.overlaps(o.strip(far)))
        throw Error(ErrorCode::OverlappingRegions, "obstacle " + std::to_string(a) + " meets an outlet");
    // One lattice ring around the obstacle must lie in the core.
    for (double x = ob.x0 - 0.5 * q; x < ob.x1 + q; x += q)
      for (double y = ob.y0 - 0.5 * q; y < ob.y1 + q; y += q)
        if (!in_any(spec.core, {x, y}))
          throw Error(ErrorCode::InvalidSpec, "obstacle " + std::to_string(a) + " not strictly inside the core");
  }

  for (std::size_t j = 0; j < spec.outlets.size(); ++j) {
    const OutletSpec& o = spec.outlets[j];
    const Box s = o.strip(far);
    for (const Box& c : spec.core)
      if (s.overlaps(c))
        throw Error(ErrorCode::OverlappingRegions, "outlet " + std::to_string(j) + " overlaps the core");
    for (std::size_t k = j + 1; k < spec.outlets.size(); ++k)
      if (s.overlaps(spec.outlets[k].strip(far)))
        throw Error(ErrorCode::OverlappingRegions,
                    "outlets " + std::to_string(j) + " and " + std::to_string(k) + " overlap");
    const int m = static_cast<int>(std::lround(o.width / q));
    for (int i = 0; i < m; ++i) {
      const Vec2 inside = o.to_global(-0.5 * q, (i + 0.5) * q);
      const int ci = static_cast<int>(std::floor((inside.x - r.x0) / q));
      const int cj = static_cast<int>(std::floor((inside.y - r.y0) / q));
      if (r.at(ci, cj) != CellType::Fluid)
        throw Error(ErrorCode::InvalidSpec, "mouth of outlet " + std::to_string(j) + " is not on the core boundary");
    }
  }

  int fluid = 0;
  for (CellType c : r.cells) fluid += c == CellType::Fluid;
  if (fluid == 0) throw Error(ErrorCode::InvalidSpec, "core has no fluid");
  if (count_components(r) != 1) throw Error(ErrorCode::DisconnectedDomain, "core fluid region is disconnected");

  ValidatedDomain d;
  d.spec_ = spec;
  d.quantum_ = q;
  d.core_area_ = fluid * q * q;
  d.residual_ = outer_flux(spec, r, &d.scale_);
  if (std::abs(d.residual_) > std::max(1e-12, 1e-15 * d.scale_))
    throw Error(ErrorCode::FluxIncompatible, "outflow compatibility violated", d.residual_);
  return d;
}

double TruncatedDomain::area() const {
  double a = domain.core_area();
  for (const OutletSpec& o : domain.outlets()) a += t * o.width;
  return a;
}

bool TruncatedDomain::contains(Vec2 p) const { return in_truncation(p, t, kTol); }

bool TruncatedDomain::in_truncation(Vec2 p, double s, double tol) const {
  const Region r = domain.locate(p);
  if (r.outlet >= 0) return r.x <= s + tol;
  return domain.in_core(p);
}

Box TruncatedDomain::bounds() const {
  Box b = domain.core_bounds();
  if (t > 0.0)
    for (const OutletSpec& o : domain.outlets()) {
      const Box s = o.strip(t);
      b.x0 = std::min(b.x0, s.x0);
      b.y0 = std::min(b.y0, s.y0);
      b.x1 = std::max(b.x1, s.x1);
      b.y1 = std::max(b.y1, s.y1);
    }
  return b;
}

TruncatedDomain truncate(const ValidatedDomain& domain, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::OutOfRange, "truncation length must be >= 0", t);
  TruncatedDomain tr{domain, t, {}};
  if (t > 0.0)
    for (int j = 0; j < domain.num_outlets(); ++j) {
      const OutletSpec& o = domain.outlets()[j];
      tr.caps.push_back({j, o.to_global(t, 0.0), o.to_global(t, o.width), o.width});
    }
  return tr;
}

MacGrid::MacGrid(int nx, int ny, double delta, int lattice_i, int lattice_j, std::vector<CellType> cells)
    : nx_(nx), ny_(ny), delta_(delta), lattice_i_(lattice_i), lattice_j_(lattice_j), cells_(std::move(cells)) {
  if (nx <= 0 || ny <= 0 || !(delta > 0.0) || static_cast<int>(cells_.size()) != nx * ny)
    throw Error(ErrorCode::GridMismatch, "inconsistent grid dimensions");
  fluid_index_.assign(cells_.size(), -1);
  for (int c = 0; c < num_cells(); ++c)
    if (cells_[c] == CellType::Fluid) {
      fluid_index_[c] = static_cast<int>(fluid_cells_.size());
      fluid_cells_.push_back(c);
    }
  face_types_.assign(num_faces(), FaceType::Inactive);
  tags_.assign(num_faces(), BoundaryTag::None);
  tag_outlet_.assign(num_faces(), -1);
  unknown_index_.assign(num_faces(), -1);
  for (int g = 0; g < num_faces(); ++g) {
    const auto [lo, hi] = face_cells(g);
    const CellType a = lo >= 0 ? cells_[lo] : CellType::Outside;
    const CellType b = hi >= 0 ? cells_[hi] : CellType::Outside;
    const bool fa = a == CellType::Fluid, fb = b == CellType::Fluid;
    if (fa && fb) {
      face_types_[g] = FaceType::Interior;
      unknown_index_[g] = static_cast<int>(unknown_faces_.size());
      unknown_faces_.push_back(g);
    } else if (fa || fb) {
      face_types_[g] = FaceType::Boundary;
      const CellType other = fa ? b : a;
      tags_[g] = other == CellType::Solid ? BoundaryTag::Obstacle : BoundaryTag::Wall;
      boundary_faces_.push_back(g);
    }
  }
}

CellType MacGrid::cell(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return CellType::Outside;
  return cells_[cell_index(i, j)];
}

Vec2 MacGrid::cell_center(int c) const {
  const int i = c % nx_, j = c / nx_;
  return {(lattice_i_ + i + 0.5) * delta_, (lattice_j_ + j + 0.5) * delta_};
}

int MacGrid::u_gid_checked(int i, int j) const {
  if (i < 0 || i > nx_ || j < 0 || j >= ny_) return -1;
  return u_gid(i, j);
}

int MacGrid::v_gid_checked(int i, int j) const {
  if (i < 0 || i >= nx_ || j < 0 || j > ny_) return -1;
  return v_gid(i, j);
}

std::array<int, 2> MacGrid::face_ij(int gid) const {
  if (gid < num_u()) return {gid % (nx_ + 1), gid / (nx_ + 1)};
  const int k = gid - num_u();
  return {k % nx_, k / nx_};
}

Vec2 MacGrid::face_center(int gid) const {
  const auto [i, j] = face_ij(gid);
  if (component(gid) == 0) return {(lattice_i_ + i) * delta_, (lattice_j_ + j + 0.5) * delta_};
  return {(lattice_i_ + i + 0.5) * delta_, (lattice_j_ + j) * delta_};
}

std::array<int, 2> MacGrid::face_cells(int gid) const {
  const auto [i, j] = face_ij(gid);
  if (component(gid) == 0)
    return {i > 0 ? cell_index(i - 1, j) : -1, i < nx_ ? cell_index(i, j) : -1};
  return {j > 0 ? cell_index(i, j - 1) : -1, j < ny_ ? cell_index(i, j) : -1};
}

int MacGrid::find_face(Vec2 p, int comp) const {
  const double x = p.x / delta_ - lattice_i_, y = p.y / delta_ - lattice_j_;
  if (comp == 0) return u_gid_checked(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y - 0.5)));
  return v_gid_checked(static_cast<int>(std::lround(x - 0.5)), static_cast<int>(std::lround(y)));
}

int MacGrid::find_cell(Vec2 p) const {
  const int i = static_cast<int>(std::floor(p.x / delta_ - lattice_i_));
  const int j = static_cast<int>(std::floor(p.y / delta_ - lattice_j_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  return cell_index(i, j);
}

int MacGrid::boundary_orientation(int gid) const {
  const auto [lo, hi] = face_cells(gid);
  return (lo >= 0 && cells_[lo] == CellType::Fluid) ? 1 : -1;
}

bool commensurate(double v, double delta) {
  const double r = v / delta;
  return std::abs(r - std::round(r)) <= kTol * std::max(1.0, std::abs(r));
}

MacGrid build_grid(const TruncatedDomain& trunc, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::NonCommensurateGrid, "grid spacing must be positive", delta);
  std::vector<double> lengths = coordinates(trunc.domain.spec());
  lengths.push_back(trunc.t);
  for (double v : lengths)
    if (!commensurate(v, delta))
      throw Error(ErrorCode::NonCommensurateGrid, "length " + std::to_string(v) + " is not a multiple of the spacing",
                  v);
  const Box b = trunc.bounds();
  const int i0 = static_cast<int>(std::lround(b.x0 / delta));
  const int j0 = static_cast<int>(std::lround(b.y0 / delta));
  const int nx = static_cast<int>(std::lround(b.x1 / delta)) - i0;
  const int ny = static_cast<int>(std::lround(b.y1 / delta)) - j0;
  std::vector<CellType> cells(static_cast<std::size_t>(nx) * ny, CellType::Outside);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 c{(i0 + i + 0.5) * delta, (j0 + j + 0.5) * delta};
      CellType t = CellType::Outside;
      if (trunc.domain.in_obstacle(c))
        t = CellType::Solid;
      else if (trunc.contains(c))
        t = CellType::Fluid;
      cells[static_cast<std::size_t>(j) * nx + i] = t;
    }
  MacGrid g(nx, ny, delta, i0, j0, std::move(cells));
  for (int gid : g.boundary_faces()) {
    const Vec2 p = g.face_center(gid);
    for (int j = 0; j < trunc.domain.num_outlets(); ++j) {
      const OutletSpec& o = trunc.domain.outlets()[j];
      const Vec2 l = o.to_local(p);
      if (g.component(gid) == (o.horizontal() ? 0 : 1) && near(l.x, trunc.t) && l.y > 0.0 && l.y < o.width) {
        g.set_boundary_tag(gid, BoundaryTag::Cap);
        g.set_boundary_outlet(gid, j);
      }
    }
  }
  return g;
}

std::function<double(Vec2, int, bool)> wall_data(const TruncatedDomain& trunc) {
  return [trunc](Vec2 p, int component, bool horizontal_wall) {
    for (const OutletSpec& o : trunc.domain.outlets()) {
      if (o.horizontal() == horizontal_wall) continue;
      const Vec2 l = o.to_local(p);
      if (near(l.x, trunc.t) && l.y >= -kTol && l.y <= o.width + kTol) return 0.0;
    }
    const Vec2 a = trunc.domain.wall_velocity(p, horizontal_wall);
    return component == 0 ? a.x : a.y;
  };
}

double SectionSampler::flux(const std::vector<double>& vel) const {
  double s = 0.0;
  for (std::size_t k = 0; k < faces.size(); ++k) s += weights[k] * vel[faces[k]];
  return sign * s;
}

SectionSampler cross_section(const TruncatedDomain& trunc, const MacGrid& grid, int outlet, double x) {
  if (outlet < 0 || outlet >= trunc.domain.num_outlets())
    throw Error(ErrorCode::OutOfRange, "outlet index out of range", outlet);
  if (x < -kTol || x > trunc.t + kTol) throw Error(ErrorCode::OutOfRange, "section abscissa outside [0, t]", x);
  const OutletSpec& o = trunc.domain.outlets()[outlet];
  const double d = grid.delta();
  SectionSampler s;
  s.outlet = outlet;
  s.x = std::round(x / d) * d;
  const int comp = o.horizontal() ? 0 : 1;
  s.sign = comp == 0 ? o.e1().x : o.e1().y;
  const int m = static_cast<int>(std::lround(o.width / d));
  for (int k = 0; k < m; ++k) {
    const int gid = grid.find_face(o.to_global(s.x, (k + 0.5) * d), comp);
    if (gid < 0) throw Error(ErrorCode::GridMismatch, "section leaves the grid");
    s.faces.push_back(gid);
    s.weights.push_back(d);
  }
  return s;
}

std::string mask_csv(const MacGrid& grid) {
  std::ostringstream os;
  for (int j = grid.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (i) os << ',';
      os << static_cast<int>(grid.cell(i, j));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cpflow
