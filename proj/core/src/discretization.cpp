#include "cpflow/discretization.hpp"

#include <cmath>

#include "cpflow/error.hpp"

namespace cpflow {

namespace {

constexpr double kSign[4] = {1.0, -1.0, 1.0, -1.0};

Neighbor face_neighbor(const MacGrid& g, int gid) {
  Neighbor n;
  n.gid = gid;
  if (g.face_type(gid) == FaceType::Interior) {
    n.kind = NbKind::Unknown;
    n.unknown = g.unknown_index(gid);
  } else {
    n.kind = NbKind::Known;
  }
  return n;
}

}  // namespace

Discretization::Discretization(std::shared_ptr<const MacGrid> grid, WallFn wall)
    : grid_(std::move(grid)), wall_(std::move(wall)) {
  const MacGrid& g = *grid_;
  if (g.fluid_cells().empty()) throw Error(ErrorCode::GridMismatch, "grid has no fluid cells");
  pinned_cell_ = g.fluid_cells().front();
  const double h = 0.5 * g.delta();
  auto ghost = [&](Vec2 at, int comp, bool horizontal) {
    Neighbor n;
    n.kind = NbKind::Ghost;
    n.wall = at;
    n.a = wall_ ? wall_(at, comp, horizontal) : 0.0;
    return n;
  };
  auto along = [&](int gid, int comp, int di, int dj) -> Neighbor {
    const auto [i, j] = g.face_ij(gid);
    const int n = comp == 0 ? g.u_gid_checked(i + di, j + dj) : g.v_gid_checked(i + di, j + dj);
    if (n >= 0 && g.face_type(n) != FaceType::Inactive) return face_neighbor(g, n);
    const Vec2 c = g.face_center(gid);
    return ghost({c.x + di * h, c.y + dj * h}, comp, dj != 0);
  };

  stencils_.reserve(g.unknown_faces().size());
  for (int gid : g.unknown_faces()) {
    FaceStencil s;
    s.gid = gid;
    s.component = g.component(gid);
    const auto [i, j] = g.face_ij(gid);
    s.nb[East] = along(gid, s.component, 1, 0);
    s.nb[West] = along(gid, s.component, -1, 0);
    s.nb[North] = along(gid, s.component, 0, 1);
    s.nb[South] = along(gid, s.component, 0, -1);
    if (s.component == 0) {
      s.flux_faces[East] = {g.u_gid(i, j), g.u_gid(i + 1, j)};
      s.flux_faces[West] = {g.u_gid(i - 1, j), g.u_gid(i, j)};
      s.flux_faces[North] = {g.v_gid(i - 1, j + 1), g.v_gid(i, j + 1)};
      s.flux_faces[South] = {g.v_gid(i - 1, j), g.v_gid(i, j)};
      s.cell_lo = g.cell_index(i - 1, j);
      s.cell_hi = g.cell_index(i, j);
    } else {
      s.flux_faces[North] = {g.v_gid(i, j), g.v_gid(i, j + 1)};
      s.flux_faces[South] = {g.v_gid(i, j - 1), g.v_gid(i, j)};
      s.flux_faces[East] = {g.u_gid(i + 1, j - 1), g.u_gid(i + 1, j)};
      s.flux_faces[West] = {g.u_gid(i, j - 1), g.u_gid(i, j)};
      s.cell_lo = g.cell_index(i, j - 1);
      s.cell_hi = g.cell_index(i, j);
    }
    stencils_.push_back(s);
  }

  for (int gid : g.boundary_faces()) {
    const int comp = g.component(gid);
    // Transverse neighbors run along the wall the face sits on.
    const int di = comp == 0 ? 0 : 1, dj = comp == 0 ? 1 : 0;
    for (int sgn : {1, -1}) {
      const Neighbor n = along(gid, comp, sgn * di, sgn * dj);
      if (n.kind == NbKind::Ghost) boundary_ghosts_.push_back({gid, n.wall, n.a});
    }
  }
}

int Discretization::pressure_unknown(int cell) const {
  const int fi = grid_->fluid_index(cell);
  const int pin = grid_->fluid_index(pinned_cell_);
  if (fi < 0 || fi == pin) return -1;
  return fi < pin ? fi : fi - 1;
}

std::vector<double> Discretization::momentum_residual(const std::vector<double>& vel,
                                                      const std::vector<double>& p,
                                                      const std::vector<double>* force, double ghost_scale,
                                                      bool convect) const {
  const double d = grid_->delta(), id2 = 1.0 / (d * d), id = 1.0 / d;
  std::vector<double> r(stencils_.size());
  for (std::size_t k = 0; k < stencils_.size(); ++k) {
    const FaceStencil& s = stencils_[k];
    const double uf = vel[s.gid];
    double diff = 0.0, conv = 0.0;
    for (int dir = 0; dir < 4; ++dir) {
      const Neighbor& n = s.nb[dir];
      double bar;
      if (n.kind == NbKind::Ghost) {
        const double a = ghost_scale * n.a;
        diff += 2.0 * (uf - a);
        bar = a;
      } else {
        diff += uf - vel[n.gid];
        bar = 0.5 * (uf + vel[n.gid]);
      }
      if (convect) {
        const double m = 0.5 * kSign[dir] * (vel[s.flux_faces[dir][0]] + vel[s.flux_faces[dir][1]]);
        conv += m * bar;
      }
    }
    double val = diff * id2 + conv * id + (p[s.cell_hi] - p[s.cell_lo]) * id;
    if (force) val -= (*force)[s.gid];
    r[k] = val;
  }
  return r;
}

std::vector<double> Discretization::divergence(const std::vector<double>& vel) const {
  const MacGrid& g = *grid_;
  const double id = 1.0 / g.delta();
  std::vector<double> div(g.fluid_cells().size());
  for (std::size_t k = 0; k < div.size(); ++k) {
    const int c = g.fluid_cells()[k];
    const int i = c % g.nx(), j = c / g.nx();
    div[k] = (vel[g.u_gid(i + 1, j)] - vel[g.u_gid(i, j)] + vel[g.v_gid(i, j + 1)] - vel[g.v_gid(i, j)]) * id;
  }
  return div;
}

Eigen::SparseMatrix<double> Discretization::jacobian(const std::vector<double>& vel, Linearization lin,
                                                     double ghost_scale) const {
  const MacGrid& g = *grid_;
  const double d = g.delta(), id2 = 1.0 / (d * d), id = 1.0 / d;
  const int nu = num_unknowns();
  const int n = nu + num_pressure_unknowns();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nu) * 15 + g.fluid_cells().size() * 4);
  const bool convect = lin != Linearization::Stokes;
  for (int k = 0; k < nu; ++k) {
    const FaceStencil& s = stencils_[k];
    const double uf = vel[s.gid];
    double diag = 0.0;
    for (int dir = 0; dir < 4; ++dir) {
      const Neighbor& nb = s.nb[dir];
      const double m = 0.5 * kSign[dir] * (vel[s.flux_faces[dir][0]] + vel[s.flux_faces[dir][1]]);
      double bar;
      if (nb.kind == NbKind::Ghost) {
        diag += 2.0 * id2;
        bar = ghost_scale * nb.a;
      } else {
        diag += id2;
        bar = 0.5 * (uf + vel[nb.gid]);
        if (nb.kind == NbKind::Unknown) trip.emplace_back(k, nb.unknown, -id2 + (convect ? 0.5 * m * id : 0.0));
        if (convect) diag += 0.5 * m * id;
      }
      if (lin == Linearization::Newton)
        for (int ff : s.flux_faces[dir]) {
          const int col = g.unknown_index(ff);
          if (col >= 0) trip.emplace_back(k, col, 0.5 * kSign[dir] * bar * id);
        }
    }
    trip.emplace_back(k, k, diag);
    const int phi = pressure_unknown(s.cell_hi), plo = pressure_unknown(s.cell_lo);
    if (phi >= 0) trip.emplace_back(k, nu + phi, id);
    if (plo >= 0) trip.emplace_back(k, nu + plo, -id);
  }
  for (int c : g.fluid_cells()) {
    const int row = pressure_unknown(c);
    if (row < 0) continue;
    const int i = c % g.nx(), j = c / g.nx();
    const std::array<std::pair<int, double>, 4> faces{
        {{g.u_gid(i + 1, j), -id}, {g.u_gid(i, j), id}, {g.v_gid(i, j + 1), -id}, {g.v_gid(i, j), id}}};
    for (const auto& [gid, w] : faces) {
      const int col = g.unknown_index(gid);
      if (col >= 0) trip.emplace_back(nu + row, col, w);
    }
  }
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double Discretization::boundary_flux(const std::vector<double>& vel) const {
  const MacGrid& g = *grid_;
  double s = 0.0;
  for (int gid : g.boundary_faces()) s += g.boundary_orientation(gid) * vel[gid] * g.delta();
  return s;
}

double weighted_norm(const std::vector<double>& v, double delta) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s) * delta;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dirichlet_energy(const Discretization& disc, const std::vector<double>& vel, double ghost_scale,
                        const RegionFn& region) {
  const MacGrid& g = disc.grid();
  auto in = [&](Vec2 p) { return !region || region(p); };
  double e = 0.0;
  for (const FaceStencil& s : disc.stencils()) {
    const Vec2 pf = g.face_center(s.gid);
    if (!in(pf)) continue;
    const double uf = vel[s.gid];
    for (int dir = 0; dir < 4; ++dir) {
      const Neighbor& n = s.nb[dir];
      if (n.kind == NbKind::Ghost) {
        if (!in(n.wall)) continue;
        const double r = uf - ghost_scale * n.a;
        e += 2.0 * r * r;
      } else {
        // Unknown-unknown edges are visited twice.
        if (n.kind == NbKind::Unknown && (dir == West || dir == South)) continue;
        if (!in(g.face_center(n.gid))) continue;
        const double r = uf - vel[n.gid];
        e += r * r;
      }
    }
  }
  // Edges between boundary values run along walls and carry half weight.
  for (int gid : g.boundary_faces()) {
    const Vec2 pf = g.face_center(gid);
    if (!in(pf)) continue;
    const auto [i, j] = g.face_ij(gid);
    const int nbr = g.component(gid) == 0 ? g.u_gid_checked(i, j + 1) : g.v_gid_checked(i + 1, j);
    if (nbr < 0 || g.face_type(nbr) != FaceType::Boundary || !in(g.face_center(nbr))) continue;
    const double r = vel[gid] - vel[nbr];
    e += 0.5 * r * r;
  }
  for (const BoundaryGhost& bg : disc.boundary_ghosts()) {
    if (!in(g.face_center(bg.gid)) || !in(bg.wall)) continue;
    const double r = vel[bg.gid] - ghost_scale * bg.a;
    e += r * r;
  }
  return e;
}

}  // namespace cpflow
