#pragma once

// Post-solve checks: the discrete energy balance on sub-truncations, the
// Bernoulli function and Euler divergence identity, decay towards the
// channel flows along the outlets, and a two-start uniqueness experiment.

#include <cstdint>
#include <functional>
#include <vector>

#include "cpflow/invading.hpp"

namespace cpflow {

struct EnergyIdentity {
  double t{0.0};
  double lhs{0.0};         // D(t)
  double rhs{0.0};
  double forcing{0.0};     // <g, w>
  double convection{0.0};  // <(w.grad)U, w>
  double b_diffusion{0.0};
  double b_convection{0.0};
  double b_pressure{0.0};
  double residual{0.0};    // |lhs - rhs| / max(lhs, eps_mach)
};

/// Energy balance of a converged perturbation over Omega^t (t <= t_k - 1):
/// D(t) = <g, w> - <(w.grad)U, w> - (boundary terms on the section at t).
/// `pressure_shift` adds a constant to p before evaluation.
EnergyIdentity energy_identity_residual(const SolveResult& result, const CarrierField& carrier,
                                        const std::vector<double>* force, double t, double pressure_shift = 0.0);

/// Cell-centered velocity and pressure on an nx x ny block.
struct CenterField {
  int nx{0};
  int ny{0};
  double delta{1.0};
  Vec2 origin{};
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<double> q;

  Vec2 center(int i, int j) const { return {origin.x + (i + 0.5) * delta, origin.y + (j + 0.5) * delta}; }
  int index(int i, int j) const { return j * nx + i; }
};

CenterField sample_center_field(int nx, int ny, double delta, Vec2 origin, const std::function<Vec2(Vec2)>& v,
                                const std::function<double(Vec2)>& q);
/// Face averages to centers; cells outside the fluid get zeros.
CenterField to_centers(const StaggeredField& field, const std::vector<double>& vel);

struct EulerIdentity {
  std::vector<double> phi;    // q + |v|^2 / 2 at every center
  std::vector<double> omega;  // vorticity at the (nx - 1) x (ny - 1) inner nodes
  double residual{0.0};     // max over interior centers of |div(q z + (v.z) v) - 2 phi|
};

EulerIdentity bernoulli_and_euler_identity(const CenterField& f);

struct OutletAsymptotics {
  int outlet{0};
  double max_cp{0.0};
  std::vector<double> x;          // section abscissae
  std::vector<double> sup_dev;    // sup over the section of |u - CP|
  std::vector<double> slab_start; // tau
  std::vector<double> slab_dev;   // Dirichlet seminorm of u - CP over [tau, tau + 1]
  bool monotone_tail{false};
  double final_dev{0.0};          // sup deviation over the final slab of the tail
  bool final_ok{false};
};

struct AsymptoticsOptions {
  double exclude{2.0};           // units dropped next to the cap
  double tail{6.0};              // length of the monotonicity window
  double final_threshold{0.01};  // relative to max |CP|
  double noise_floor{1e-12};     // relative to max |CP|
};

struct AsymptoticsReport {
  double t{0.0};
  std::vector<OutletAsymptotics> outlets;
  bool all_ok() const;
};

/// Deviation of u from the grid-consistent channel flow of each outlet.
/// Throws TruncationTooShort when t < 12.
AsymptoticsReport asymptotics_report(const SolveResult& result, const CarrierField& carrier,
                                     const AsymptoticsOptions& opts = {});

/// Random divergence-free face field from a nodal stream vanishing on
/// boundary nodes, scaled to Dirichlet norm `norm`.
std::vector<double> random_solenoidal(const Discretization& disc, double norm, std::uint64_t seed);

struct UniquenessResult {
  double discrepancy{0.0};  // max |u_A - u_B| / max |u_A|
  double J_a{0.0};
  double J_b{0.0};
  SolveResult a;
  SolveResult b;
};

/// Solves the same truncation from w = 0 and from a random perturbation of
/// Dirichlet norm `init_norm`.
UniquenessResult uniqueness_experiment(const CarrierField& carrier, const SolverOptions& opts,
                                       const std::vector<double>* force, double init_norm, std::uint64_t seed);

/// Multiplies every boundary datum (outlet fluxes and slips, obstacle and
/// core wall velocities) by s.
DomainSpec scale_data(const DomainSpec& spec, double s);

struct SweepRow {
  double amplitude{0.0};
  double discrepancy{0.0};
  bool converged{false};
};

struct UniquenessSweep {
  std::vector<SweepRow> rows;
  double first_divergent{0.0};  // 0 when every amplitude agreed
};

/// Uniqueness experiment over data amplitudes; runs differing by more than
/// `threshold` mark the first divergent amplitude.
UniquenessSweep uniqueness_sweep(const DomainSpec& spec, const std::vector<double>& amplitudes, double delta,
                                 double t, CarrierMode mode, double eps, const SolverOptions& opts,
                                 std::uint64_t seed, double threshold = 1e-6);

}  // namespace cpflow
