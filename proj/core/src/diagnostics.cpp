#include "cpflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cpflow/error.hpp"

namespace cpflow {

namespace {

constexpr double kSign[4] = {1.0, -1.0, 1.0, -1.0};

}  // namespace

EnergyIdentity energy_identity_residual(const SolveResult& result, const CarrierField& carrier,
                                        const std::vector<double>* force, double t, double pressure_shift) {
  const Discretization& disc = *carrier.disc;
  const MacGrid& g = disc.grid();
  const TruncatedDomain& trunc = carrier.trunc;
  if (t < 0.0 || t > trunc.t + 1e-12)
    throw Error(ErrorCode::OutOfRange, "energy window exceeds the truncation", t);
  const double d = g.delta();
  const std::vector<double>& U = carrier.vel;
  const std::vector<double>& w = result.field.vel;
  const std::vector<double>& u = result.u;
  std::vector<double> p = result.field.p;
  for (int c : g.fluid_cells()) p[c] += pressure_shift;

  auto in = [&](Vec2 x) { return trunc.in_truncation(x, t); };
  std::vector<char> in_s(g.num_faces(), 0);
  for (const FaceStencil& s : disc.stencils()) in_s[s.gid] = in(g.face_center(s.gid));

  EnergyIdentity out;
  out.t = t;
  out.lhs = dirichlet_energy(disc, w, 0.0, in);

  // g = f + Lap U - C(U)U, i.e. minus the residual of (U, p = 0).
  const std::vector<double> zero_p(g.num_cells(), 0.0);
  const std::vector<double> rU = disc.momentum_residual(U, zero_p, force, 1.0, true);

  for (std::size_t k = 0; k < disc.stencils().size(); ++k) {
    const FaceStencil& s = disc.stencils()[k];
    if (!in_s[s.gid]) continue;
    const double wf = w[s.gid];
    out.forcing += -rU[k] * wf * d * d;

    double advect = 0.0;
    for (int dir = 0; dir < 4; ++dir) {
      const Neighbor& n = s.nb[dir];
      const auto& ff = s.flux_faces[dir];
      const double mw = 0.5 * kSign[dir] * (w[ff[0]] + w[ff[1]]);
      const double mu = 0.5 * kSign[dir] * (u[ff[0]] + u[ff[1]]);
      if (n.kind == NbKind::Ghost) {
        advect += mw * n.a;
        if (!in(n.wall)) out.b_diffusion += 2.0 * wf * wf;
        out.b_convection -= 0.5 * mu * wf * wf * d;
        continue;
      }
      advect += mw * 0.5 * (U[s.gid] + U[n.gid]);
      if (n.kind == NbKind::Unknown) {
        if (in_s[n.gid]) continue;
        const double wn = w[n.gid];
        out.b_diffusion += wf * (wf - wn);
        out.b_convection += 0.5 * mu * wf * wn * d;
      } else if (!in(g.face_center(n.gid))) {
        out.b_diffusion += wf * wf;
      }
    }
    out.convection += advect * wf * d;

    for (const auto& [cell, sign] : {std::pair{s.cell_lo, -1.0}, std::pair{s.cell_hi, 1.0}})
      if (!in(g.cell_center(cell))) out.b_pressure += sign * p[cell] * wf * d;
  }
  out.rhs = out.forcing - out.convection - out.b_diffusion - out.b_convection - out.b_pressure;
  out.residual = std::abs(out.lhs - out.rhs) / std::max(out.lhs, std::numeric_limits<double>::epsilon());
  return out;
}

CenterField sample_center_field(int nx, int ny, double delta, Vec2 origin, const std::function<Vec2(Vec2)>& v,
                                const std::function<double(Vec2)>& q) {
  CenterField f;
  f.nx = nx;
  f.ny = ny;
  f.delta = delta;
  f.origin = origin;
  f.vx.resize(nx * ny);
  f.vy.resize(nx * ny);
  f.q.resize(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 z = f.center(i, j);
      const Vec2 vz = v(z);
      f.vx[f.index(i, j)] = vz.x;
      f.vy[f.index(i, j)] = vz.y;
      f.q[f.index(i, j)] = q(z);
    }
  return f;
}

CenterField to_centers(const StaggeredField& field, const std::vector<double>& vel) {
  const MacGrid& g = *field.grid;
  CenterField f;
  f.nx = g.nx();
  f.ny = g.ny();
  f.delta = g.delta();
  f.origin = g.origin();
  f.vx.assign(f.nx * f.ny, 0.0);
  f.vy.assign(f.nx * f.ny, 0.0);
  f.q.assign(f.nx * f.ny, 0.0);
  for (int c : g.fluid_cells()) {
    const int i = c % g.nx(), j = c / g.nx();
    f.vx[c] = 0.5 * (vel[g.u_gid(i, j)] + vel[g.u_gid(i + 1, j)]);
    f.vy[c] = 0.5 * (vel[g.v_gid(i, j)] + vel[g.v_gid(i, j + 1)]);
    f.q[c] = field.p[c];
  }
  return f;
}

EulerIdentity bernoulli_and_euler_identity(const CenterField& f) {
  const int n = f.nx * f.ny;
  if (f.nx < 1 || f.ny < 1 || static_cast<int>(f.vx.size()) != n || static_cast<int>(f.vy.size()) != n ||
      static_cast<int>(f.q.size()) != n)
    throw Error(ErrorCode::GridMismatch, "center field arrays do not match the block");
  EulerIdentity out;
  out.phi.resize(n);
  std::vector<double> Fx(n), Fy(n);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      const int c = f.index(i, j);
      const Vec2 z = f.center(i, j);
      const double vz = f.vx[c] * z.x + f.vy[c] * z.y;
      out.phi[c] = f.q[c] + 0.5 * (f.vx[c] * f.vx[c] + f.vy[c] * f.vy[c]);
      Fx[c] = f.q[c] * z.x + vz * f.vx[c];
      Fy[c] = f.q[c] * z.y + vz * f.vy[c];
    }
  const double h2 = 0.5 / f.delta;
  const int mx = std::max(f.nx - 1, 0), my = std::max(f.ny - 1, 0);
  out.omega.resize(mx * my);
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i) {
      const int a = f.index(i, j), b = f.index(i + 1, j), c = f.index(i, j + 1), e = f.index(i + 1, j + 1);
      const double dvy = (f.vy[b] + f.vy[e] - f.vy[a] - f.vy[c]) * h2;
      const double dvx = (f.vx[c] + f.vx[e] - f.vx[a] - f.vx[b]) * h2;
      out.omega[j * mx + i] = dvy - dvx;
    }
  for (int j = 1; j + 1 < f.ny; ++j)
    for (int i = 1; i + 1 < f.nx; ++i) {
      const double div = (Fx[f.index(i + 1, j)] - Fx[f.index(i - 1, j)]) * h2 +
                         (Fy[f.index(i, j + 1)] - Fy[f.index(i, j - 1)]) * h2;
      out.residual = std::max(out.residual, std::abs(div - 2.0 * out.phi[f.index(i, j)]));
    }
  return out;
}

bool AsymptoticsReport::all_ok() const {
  return std::all_of(outlets.begin(), outlets.end(),
                     [](const OutletAsymptotics& o) { return o.monotone_tail && o.final_ok; });
}

AsymptoticsReport asymptotics_report(const SolveResult& result, const CarrierField& carrier,
                                     const AsymptoticsOptions& opts) {
  const TruncatedDomain& trunc = carrier.trunc;
  if (trunc.t < 12.0) throw Error(ErrorCode::TruncationTooShort, "asymptotics need t >= 12", trunc.t);
  const Discretization& disc = *carrier.disc;
  const MacGrid& g = disc.grid();
  const double d = g.delta();
  const std::vector<double>& u = result.u;
  const int K = static_cast<int>(std::lround(trunc.t / d));

  AsymptoticsReport rep;
  rep.t = trunc.t;
  const auto& outlets = trunc.domain.outlets();
  for (int j = 0; j < static_cast<int>(outlets.size()); ++j) {
    const OutletSpec& o = outlets[j];
    const DiscreteCP dcp = discrete_cp(carrier.cps[j], d);
    const int cn = o.horizontal() ? 0 : 1, ct = 1 - cn;
    const double e1c = o.horizontal() ? o.e1().x : o.e1().y;
    const double e2c = o.horizontal() ? o.e2().y : o.e2().x;
    OutletAsymptotics oa;
    oa.outlet = j;
    for (double v : dcp.u) oa.max_cp = std::max(oa.max_cp, std::abs(v));

    std::vector<double> dev = u;
    for (int k = 0; k <= K; ++k)
      for (int m = 0; m < dcp.n; ++m) {
        const int gid = g.find_face(o.to_global(k * d, (m + 0.5) * d), cn);
        if (gid >= 0) dev[gid] = u[gid] - dcp.u[m] * e1c;
      }
    for (int k = 0; k <= K; ++k) {
      const double x = k * d;
      if (x > trunc.t - opts.exclude + 1e-9) break;
      double sup = 0.0;
      for (int m = 0; m < dcp.n; ++m) {
        const int gid = g.find_face(o.to_global(x, (m + 0.5) * d), cn);
        if (gid >= 0) sup = std::max(sup, std::abs(dev[gid]));
      }
      if (k < K)
        for (int m = 1; m < dcp.n; ++m) {
          const int gid = g.find_face(o.to_global(x + 0.5 * d, m * d), ct);
          if (gid >= 0) sup = std::max(sup, std::abs(dev[gid] * e2c));
        }
      oa.x.push_back(x);
      oa.sup_dev.push_back(sup);
    }

    const double h = o.width;
    for (int tau = 0; tau + 1 <= static_cast<int>(std::floor(trunc.t + 1e-9)); ++tau) {
      const double lo = tau, hi = tau + 1.0;
      auto slab = [&](Vec2 p) {
        const Vec2 l = o.to_local(p);
        return l.x >= lo - 1e-9 && l.x <= hi + 1e-9 && l.y >= -1e-9 && l.y <= h + 1e-9;
      };
      oa.slab_start.push_back(lo);
      oa.slab_dev.push_back(dirichlet_norm(disc, dev, 0.0, slab));
    }

    const double floor = opts.noise_floor * oa.max_cp;
    const double end = trunc.t - opts.exclude, start = end - opts.tail;
    oa.monotone_tail = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < oa.x.size(); ++k) {
      const double x = oa.x[k];
      if (x < start - 1e-9) continue;
      if (oa.sup_dev[k] > std::max(prev, floor)) oa.monotone_tail = false;
      prev = oa.sup_dev[k];
      if (x >= end - 1.0 - 1e-9) oa.final_dev = std::max(oa.final_dev, oa.sup_dev[k]);
    }
    oa.final_ok = oa.final_dev <= opts.final_threshold * oa.max_cp;
    rep.outlets.push_back(std::move(oa));
  }
  return rep;
}

std::vector<double> random_solenoidal(const Discretization& disc, double norm, std::uint64_t seed) {
  const MacGrid& g = disc.grid();
  const int nx = g.nx(), ny = g.ny();
  auto fluid = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < nx && j < ny && g.cell(i, j) == CellType::Fluid;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> psi((nx + 1) * (ny + 1), 0.0);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (fluid(i - 1, j - 1) && fluid(i, j - 1) && fluid(i - 1, j) && fluid(i, j)) psi[j * (nx + 1) + i] = uni(rng);
  auto node = [&](int i, int j) { return psi[j * (nx + 1) + i]; };
  const double id = 1.0 / g.delta();
  std::vector<double> w(g.num_faces(), 0.0);
  for (int gid : g.unknown_faces()) {
    const auto [i, j] = g.face_ij(gid);
    w[gid] = g.component(gid) == 0 ? (node(i, j + 1) - node(i, j)) * id : -(node(i + 1, j) - node(i, j)) * id;
  }
  const double J = dirichlet_norm(disc, w, 0.0);
  if (J > 0.0)
    for (double& v : w) v *= norm / J;
  return w;
}

UniquenessResult uniqueness_experiment(const CarrierField& carrier, const SolverOptions& opts,
                                       const std::vector<double>* force, double init_norm, std::uint64_t seed) {
  NSProblem prob{carrier.disc, carrier.vel, force ? *force : std::vector<double>{}};
  UniquenessResult out;
  out.a = solve_steady_ns(prob, opts);
  const std::vector<double> init = random_solenoidal(*carrier.disc, init_norm, seed);
  out.b = solve_steady_ns(prob, opts, &init);
  double diff = 0.0, mag = 0.0;
  for (std::size_t k = 0; k < out.a.u.size(); ++k) {
    diff = std::max(diff, std::abs(out.a.u[k] - out.b.u[k]));
    mag = std::max(mag, std::abs(out.a.u[k]));
  }
  out.discrepancy = mag > 0.0 ? diff / mag : diff;
  out.J_a = out.a.J;
  out.J_b = out.b.J;
  return out;
}

DomainSpec scale_data(const DomainSpec& spec, double s) {
  DomainSpec out = spec;
  for (OutletSpec& o : out.outlets) {
    o.flux *= s;
    o.slip0 *= s;
    o.slip1 *= s;
  }
  for (ObstacleSpec& ob : out.obstacles)
    for (SideData& sd : ob.sides) {
      sd.normal *= s;
      sd.tangential *= s;
    }
  for (WallSegment& w : out.core_walls) w.velocity = s * w.velocity;
  return out;
}

UniquenessSweep uniqueness_sweep(const DomainSpec& spec, const std::vector<double>& amplitudes, double delta,
                                 double t, CarrierMode mode, double eps, const SolverOptions& opts,
                                 std::uint64_t seed, double threshold) {
  UniquenessSweep out;
  for (double amp : amplitudes) {
    SweepRow row;
    row.amplitude = amp;
    const ValidatedDomain dom = validate_domain(scale_data(spec, amp));
    const CornerStokes corner = solve_corner_stokes(dom, delta);
    const CarrierField carrier = assemble_carrier(corner, t, eps, mode);
    try {
      const UniquenessResult r = uniqueness_experiment(carrier, opts, nullptr, 0.1, seed);
      row.discrepancy = r.discrepancy;
      row.converged = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence) throw;
      row.discrepancy = std::numeric_limits<double>::infinity();
    }
    if (out.first_divergent == 0.0 && !(row.discrepancy <= threshold)) out.first_divergent = amp;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace cpflow
