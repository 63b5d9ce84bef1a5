#pragma once

// Steady Stokes and Navier-Stokes solves on a MacGrid with Dirichlet data.
// Nonlinear solves run Picard (Oseen) sweeps until the residual drops below a
// switch threshold, then Newton with backtracking; data amplitude
// continuation kicks in when a level fails.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cpflow/discretization.hpp"

namespace cpflow {

struct SolverOptions {
  double tolerance{1e-10};
  double picard_switch{1e-3};
  int max_picard{60};
  int max_newton{25};
  int continuation_steps{1};
  int max_continuation_steps{64};
  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

struct ResidualNorms {
  double momentum{0.0};
  double continuity{0.0};
  double combined() const;
};

struct IterationRecord {
  int iteration{0};
  std::string phase;
  double scale{1.0};
  double momentum{0.0};
  double continuity{0.0};
};

/// Dirichlet data: values on boundary faces (other entries ignored) plus
/// the tangential wall function baked into the discretization.
struct NSProblem {
  std::shared_ptr<const Discretization> disc;
  std::vector<double> carrier;  // U on every face
  std::vector<double> force;    // empty means f = 0
};

struct SolveResult {
  StaggeredField field;      // perturbation w on faces and pressure p
  std::vector<double> u;     // full velocity U + w
  double J{0.0};
  int picard_iterations{0};
  int newton_iterations{0};
  int continuation_steps{1};
  ResidualNorms residual;
  std::vector<IterationRecord> history;
  std::string mode;
};

/// Stokes saddle-point operator of the grid (symmetric indefinite).
Eigen::SparseMatrix<double> assemble_stokes(const Discretization& disc);

/// Linear Stokes solve with boundary values from `boundary` (full face
/// array). Throws IncompatibleBoundaryFlux, SingularSystem.
StaggeredField solve_stokes(const Discretization& disc, const std::vector<double>& boundary,
                            const std::vector<double>* force = nullptr, ResidualNorms* norms = nullptr);

/// Steady Navier-Stokes for u = U + w with u = U on the boundary faces.
/// `initial` is an optional starting perturbation. Throws NonConvergence
/// (value() = best residual) or LinearSolveFailure.
SolveResult solve_steady_ns(const NSProblem& problem, const SolverOptions& opts,
                            const std::vector<double>* initial = nullptr);

/// Full nonlinear residual of u = U + w with pressure p, evaluated without
/// any solver state.
ResidualNorms ns_residual(const Discretization& disc, const std::vector<double>& carrier,
                          const StaggeredField& field, const std::vector<double>* force = nullptr);

/// sqrt of the discrete Dirichlet integral; ghost_scale 0 for perturbations.
double dirichlet_norm(const Discretization& disc, const std::vector<double>& vel, double ghost_scale = 0.0,
                      const RegionFn& region = {});

/// Samples a body force on unknown faces from an analytic (fx, fy).
std::vector<double> sample_force(const MacGrid& grid, const std::function<Vec2(Vec2)>& f);

/// Rejects boundary data whose net flux is not zero to 1e-10 relative.
void check_boundary_flux(const Discretization& disc, const std::vector<double>& vel);

}  // namespace cpflow
