#pragma once

// Solenoidal extension U of the boundary data: a Stokes solution V near the
// core, blended into Hopf cut-off outlet fields (or plain channel flows)
// through per-outlet stream functions.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cpflow/discretization.hpp"
#include "cpflow/exact_flows.hpp"
#include "cpflow/geometry.hpp"
#include "cpflow/ns_solver.hpp"

namespace cpflow {

enum class CarrierMode { Hopf, CP };

std::string to_string(CarrierMode m);
/// Throws InvalidSpec for anything but "hopf" / "cp".
CarrierMode parse_carrier_mode(const std::string& s);

/// Wall cut-off psi(delta): 1 for delta <= a_thr, 0 for delta >= b_thr, a
/// C1 clamp of the log-ramp ln(b_thr / delta) / ln(b_thr / a_thr) between.
struct HopfCutoff {
  double eps{1.0};
  double a_thr{0.0};
  double b_thr{0.0};
  double log_ratio{1.0};
  double blend{0.05};

  double operator()(double delta) const;
  /// d psi / d delta.
  double derivative(double delta) const;
};

/// Throws BadEpsilon unless 0 < eps <= 1.
HopfCutoff make_hopf_cutoff(double eps);
double hopf_psi(double eps, double delta);

/// Pointwise checks of the cut-off on a uniform delta grid over (0, 2 b_thr].
struct HopfChecks {
  double eps{0.0};
  int points{0};
  bool bounded{true};     // |psi| <= 1
  bool one_near{true};    // psi = 1 for delta <= a_thr
  bool in_unit{true};     // 0 <= psi <= 1 between the thresholds
  bool zero_far{true};    // psi = 0 for delta >= b_thr
  bool slope{true};       // |difference quotient| <= eps / delta
  bool monotone{true};
  double max_slope_ratio{0.0};  // max |difference quotient| * delta / eps
  bool all() const { return bounded && one_near && in_unit && zero_far && slope && monotone; }
};

HopfChecks hopf_property_check(double eps, int points = 10000);

/// Outlet field V(y) = d/dy [psi(delta(y)) Psi(y)] with delta the distance to
/// the nearer wall; stream(y) is the bracket itself.
struct OutletCarrier {
  CouettePoiseuille cp;
  HopfCutoff cut;
  bool hopf{true};

  double stream(double y) const;
  double velocity(double y) const;
};

OutletCarrier outlet_carrier(const CouettePoiseuille& cp, double eps);
/// Face values along e1 on the column of an outlet grid: differences of the
/// nodal stream at y = m delta, m = 0..n.
std::vector<double> outlet_carrier_column(const OutletCarrier& oc, double delta);

std::vector<CouettePoiseuille> outlet_flows(const ValidatedDomain& domain);

/// Discretization of a truncated grid with the domain wall data and the
/// pressure pinned in the first fluid cell of the core.
std::shared_ptr<Discretization> make_discretization(const TruncatedDomain& trunc,
                                                    std::shared_ptr<const MacGrid> grid);

/// Stokes solution on the truncation at t = 2 with the domain wall data and
/// grid-consistent channel profiles on the caps.
struct CornerStokes {
  TruncatedDomain trunc;
  std::shared_ptr<const MacGrid> grid;
  std::shared_ptr<const Discretization> disc;
  StaggeredField field;
  ResidualNorms residual;
};

CornerStokes solve_corner_stokes(const ValidatedDomain& domain, double delta);

/// Boundary face values of the domain data on a truncated grid (normal
/// component of a on walls and obstacles, zero on caps).
std::vector<double> wall_face_data(const TruncatedDomain& trunc, const MacGrid& grid);

struct LerayHopfReport {
  int outlet{0};
  double a{2.0};
  double b{10.0};
  int samples{0};
  double max_ratio{0.0};
  double mean_ratio{0.0};
  double max_hardy{0.0};
  double scale_error{0.0};  // max |ratio(chi) - ratio(3 chi)|
};

struct CertificationReport {
  double epsilon{0.0};
  CarrierMode mode{CarrierMode::Hopf};
  double divergence_max{0.0};
  double trace_error{0.0};
  std::vector<double> flux_error;
  std::vector<double> flux_drift;
  std::vector<double> c1;
  std::vector<LerayHopfReport> leray_hopf;
};

struct CarrierField {
  TruncatedDomain trunc;
  std::shared_ptr<const MacGrid> grid;
  std::shared_ptr<const Discretization> disc;
  std::vector<double> vel;
  double epsilon{0.0};
  CarrierMode mode{CarrierMode::Hopf};
  std::vector<CouettePoiseuille> cps;
  CertificationReport report;
};

/// Builds U on a truncation of length t >= 0 from the corner solve. Throws
/// StreamMismatch when an outlet stream does not close up to the flux.
CarrierField assemble_carrier(const CornerStokes& corner, double t, double eps, CarrierMode mode);

/// Divergence, traces, fluxes and flux drift of an assembled carrier.
void certify_discrete(CarrierField& carrier);

/// Sampled Leray-Hopf ratio (|int (eta.grad)U.eta| + |int (eta.grad)eta.U|) /
/// ||grad eta||^2 over random divergence-free eta vanishing on the walls of
/// the outlet window [a, b]. Deterministic in the seed.
LerayHopfReport leray_hopf_certify(const CarrierField& carrier, int outlet, double a, double b, int samples,
                                   std::uint64_t seed);
LerayHopfReport leray_hopf_certify(const OutletCarrier& oc, int outlet, double a, double b, int samples,
                                   std::uint64_t seed);

struct EpsilonCalibration {
  double epsilon{0.5};
  bool passed{false};
  std::vector<LerayHopfReport> reports;
  std::vector<double> tried;
};

/// Halves eps from `start` until every outlet's max ratio is <= target /
/// margin (at most `max_halvings` times).
EpsilonCalibration calibrate_epsilon(const std::vector<CouettePoiseuille>& cps, double a, double b, int samples,
                                     std::uint64_t seed, double target = 0.125, double margin = 2.0,
                                     double start = 0.5, int max_halvings = 12);

}  // namespace cpflow
