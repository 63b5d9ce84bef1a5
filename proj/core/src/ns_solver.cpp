#include "cpflow/ns_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/UmfPackSupport>

#include "cpflow/error.hpp"

namespace cpflow {

namespace {

using Vec = Eigen::VectorXd;

struct Residual {
  Vec r;  // [momentum; -div on unpinned cells]
  ResidualNorms norms;
};

Residual evaluate(const Discretization& disc, const std::vector<double>& vel, const std::vector<double>& p,
                  const std::vector<double>* force, double scale, bool convect) {
  const MacGrid& g = disc.grid();
  const int nu = disc.num_unknowns();
  std::vector<double> fs;
  if (force && scale != 1.0) {
    fs = *force;
    for (double& v : fs) v *= scale;
    force = &fs;
  }
  const std::vector<double> mom = disc.momentum_residual(vel, p, force, scale, convect);
  const std::vector<double> div = disc.divergence(vel);
  Residual res;
  res.r.resize(nu + disc.num_pressure_unknowns());
  for (int k = 0; k < nu; ++k) res.r[k] = mom[k];
  for (std::size_t k = 0; k < div.size(); ++k) {
    const int row = disc.pressure_unknown(g.fluid_cells()[k]);
    if (row >= 0) res.r[nu + row] = -div[k];
  }
  res.norms.momentum = weighted_norm(mom, g.delta());
  res.norms.continuity = weighted_norm(div, g.delta());
  return res;
}

Vec linear_solve(const Eigen::SparseMatrix<double>& J, const Vec& rhs, ErrorCode code) {
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw Error(code, "sparse factorization failed");
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Error(code, "sparse solve failed");
  return x;
}

void apply(const Discretization& disc, const Vec& dx, double alpha, std::vector<double>& vel,
           std::vector<double>& p) {
  const MacGrid& g = disc.grid();
  const int nu = disc.num_unknowns();
  for (int k = 0; k < nu; ++k) vel[disc.stencils()[k].gid] += alpha * dx[k];
  for (int c : g.fluid_cells()) {
    const int row = disc.pressure_unknown(c);
    if (row >= 0) p[c] += alpha * dx[nu + row];
  }
}

}  // namespace

double ResidualNorms::combined() const { return std::hypot(momentum, continuity); }

Eigen::SparseMatrix<double> assemble_stokes(const Discretization& disc) {
  const std::vector<double> zero(disc.grid().num_faces(), 0.0);
  return disc.jacobian(zero, Linearization::Stokes);
}

void check_boundary_flux(const Discretization& disc, const std::vector<double>& vel) {
  const MacGrid& g = disc.grid();
  double mag = 0.0;
  for (int gid : g.boundary_faces()) mag += std::abs(vel[gid]) * g.delta();
  const double net = disc.boundary_flux(vel);
  if (std::abs(net) > 1e-10 * std::max(1.0, mag))
    throw Error(ErrorCode::IncompatibleBoundaryFlux, "net boundary flux is not zero", net);
}

StaggeredField solve_stokes(const Discretization& disc, const std::vector<double>& boundary,
                            const std::vector<double>* force, ResidualNorms* norms) {
  const MacGrid& g = disc.grid();
  StaggeredField out(disc.grid_ptr());
  for (int gid : g.boundary_faces()) out.vel[gid] = boundary[gid];
  check_boundary_flux(disc, out.vel);
  const Eigen::SparseMatrix<double> K = assemble_stokes(disc);
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "Stokes operator is singular");
  Residual res = evaluate(disc, out.vel, out.p, force, 1.0, false);
  for (int pass = 0; pass < 3; ++pass) {
    const Vec rhs = -res.r;
    const Vec dx = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !dx.allFinite())
      throw Error(ErrorCode::SingularSystem, "Stokes solve failed");
    apply(disc, dx, 1.0, out.vel, out.p);
    res = evaluate(disc, out.vel, out.p, force, 1.0, false);
    if (res.norms.combined() <= 1e-12) break;
  }
  if (norms) *norms = res.norms;
  return out;
}

SolveResult solve_steady_ns(const NSProblem& problem, const SolverOptions& opts, const std::vector<double>* initial) {
  const Discretization& disc = *problem.disc;
  const MacGrid& g = disc.grid();
  const std::vector<double>& U = problem.carrier;
  const std::vector<double>* force = problem.force.empty() ? nullptr : &problem.force;
  check_boundary_flux(disc, U);

  SolveResult out;
  double best = std::numeric_limits<double>::infinity();
  int steps = std::max(1, opts.continuation_steps);
  for (;;) {
    std::vector<double> vel(g.num_faces(), 0.0), p(g.num_cells(), 0.0);
    out.history.clear();
    out.picard_iterations = out.newton_iterations = 0;
    bool failed = false;
    Residual res;
    for (int level = 1; level <= steps && !failed; ++level) {
      const double s = static_cast<double>(level) / steps;
      const double prev = static_cast<double>(level - 1) / steps;
      for (int gid : g.boundary_faces()) vel[gid] = s * U[gid];
      if (level == 1)
        for (int gid : g.unknown_faces()) vel[gid] = s * (U[gid] + (initial ? (*initial)[gid] : 0.0));
      else
        for (int gid : g.unknown_faces()) vel[gid] *= s / prev;
      const double tol = level == steps ? opts.tolerance : std::max(opts.tolerance, 1e-6);
      int picard = 0, newton = 0;
      res = evaluate(disc, vel, p, force, s, true);
      for (;;) {
        const double norm = res.norms.combined();
        out.history.push_back({out.picard_iterations + out.newton_iterations, picard + newton == 0 ? "start" : "",
                               s, res.norms.momentum, res.norms.continuity});
        if (level == steps) best = std::min(best, norm);
        if (norm <= tol) break;
        if (!std::isfinite(norm)) {
          failed = true;
          break;
        }
        const bool use_newton = norm < opts.picard_switch;
        if (use_newton ? newton >= opts.max_newton : picard >= opts.max_picard) {
          failed = true;
          break;
        }
        const Eigen::SparseMatrix<double> J =
            disc.jacobian(vel, use_newton ? Linearization::Newton : Linearization::Picard, s);
        const Vec rhs = -res.r;
        const Vec dx = linear_solve(J, rhs, ErrorCode::LinearSolveFailure);
        double alpha = 1.0;
        std::vector<double> v1, p1;
        Residual r1;
        for (int ls = 0; ls < (use_newton ? 10 : 1); ++ls, alpha *= 0.5) {
          v1 = vel;
          p1 = p;
          apply(disc, dx, alpha, v1, p1);
          r1 = evaluate(disc, v1, p1, force, s, true);
          if (r1.norms.combined() <= (1.0 - 1e-4 * alpha) * norm) break;
        }
        vel = std::move(v1);
        p = std::move(p1);
        res = std::move(r1);
        if (use_newton) {
          ++newton;
          ++out.newton_iterations;
        } else {
          ++picard;
          ++out.picard_iterations;
        }
        out.history.back().phase = use_newton ? "newton" : "picard";
      }
    }
    if (!failed) {
      out.continuation_steps = steps;
      out.residual = res.norms;
      out.u = vel;
      out.field = StaggeredField(disc.grid_ptr());
      for (int gid = 0; gid < g.num_faces(); ++gid)
        out.field.vel[gid] = g.face_type(gid) == FaceType::Interior ? vel[gid] - U[gid] : 0.0;
      out.field.p = p;
      out.J = dirichlet_norm(disc, out.field.vel, 0.0);
      return out;
    }
    if (steps * 2 > opts.max_continuation_steps)
      throw Error(ErrorCode::NonConvergence, "nonlinear solve did not converge", best);
    steps *= 2;
  }
}

ResidualNorms ns_residual(const Discretization& disc, const std::vector<double>& carrier, const StaggeredField& field,
                          const std::vector<double>* force) {
  const MacGrid& g = disc.grid();
  std::vector<double> vel(g.num_faces(), 0.0);
  for (int gid = 0; gid < g.num_faces(); ++gid)
    if (g.face_type(gid) != FaceType::Inactive) vel[gid] = carrier[gid] + field.vel[gid];
  ResidualNorms n;
  n.momentum = weighted_norm(disc.momentum_residual(vel, field.p, force, 1.0, true), g.delta());
  n.continuity = weighted_norm(disc.divergence(vel), g.delta());
  return n;
}

double dirichlet_norm(const Discretization& disc, const std::vector<double>& vel, double ghost_scale,
                      const RegionFn& region) {
  return std::sqrt(dirichlet_energy(disc, vel, ghost_scale, region));
}

std::vector<double> sample_force(const MacGrid& grid, const std::function<Vec2(Vec2)>& f) {
  std::vector<double> out(grid.num_faces(), 0.0);
  for (int gid : grid.unknown_faces()) {
    const Vec2 v = f(grid.face_center(gid));
    out[gid] = grid.component(gid) == 0 ? v.x : v.y;
  }
  return out;
}

}  // namespace cpflow
