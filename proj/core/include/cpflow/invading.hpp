#pragma once

// Invading domains: steady solves on the truncations t_0 < t_1 < ... with
// the carrier as Dirichlet data, energy growth profiles t -> D(t) and the
// one-dimensional comparison lemma used by the growth estimates.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpflow/error.hpp"
#include "cpflow/flux_carrier.hpp"
#include "cpflow/ns_solver.hpp"

namespace cpflow {

struct Schedule {
  std::vector<double> t;

  /// t_k = t0 + step * k, k = 0..K.
  static Schedule linear(double t0, double step, int K);
  /// Formula "a+bk,K=n" (spaces ignored) or an explicit comma list
  /// "2,6,10". Throws ParseError.
  static Schedule parse(const std::string& text);
  std::string to_string() const;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct InvadingOptions {
  double delta{1.0 / 16.0};
  CarrierMode mode{CarrierMode::Hopf};
  double epsilon{0.5};
  SolverOptions solver{};
  std::function<Vec2(Vec2)> force{};
  bool warm_start{true};
};

struct InvadingStep {
  int k{0};
  double t{0.0};
  bool ok{false};
  std::string error;
  std::optional<ErrorCode> failure;
  CarrierField carrier;
  SolveResult result;
};

struct InvadingRun {
  std::vector<InvadingStep> steps;
  std::string regime;  // "I" bounded, "II" growing
};

/// Case II when J_{k+1} / J_k > 1.05 for three consecutive k.
std::string classify_regime(const std::vector<double>& J, double ratio = 1.05, int run = 3);

/// Solves every truncation of the schedule; failures are recorded per step
/// and later steps continue from the last good solve.
InvadingRun run_invading(const ValidatedDomain& domain, const Schedule& schedule, const InvadingOptions& opts);

struct GrowthProfile {
  std::vector<double> t;
  std::vector<double> D;   // D(t) over the truncation of length t
  std::vector<double> e;   // D(t) - D(t - 1); e[0] = D[0]
  std::vector<double> h;   // running unit-window average of D
  double c0{0.0};          // least-squares slope over the fit window
  double c1{0.0};          // smallest intercept with D <= c0 t + c1 there
  bool monotone{true};
};

/// D(t) for every t in t_grid (each <= the solved truncation).
GrowthProfile growth_profile(const InvadingStep& step, const std::vector<double>& t_grid);
/// Integer grid 0, 1, ..., floor(t).
std::vector<double> integer_grid(double t);
/// Least-squares slope of D(t) over t in [lo, hi].
double fitted_slope(const GrowthProfile& g, double lo, double hi);
/// Largest slab energy e(tau) over tau in [lo, hi].
double max_slab_energy(const GrowthProfile& g, double lo, double hi);

struct NormalizedEntry {
  int k{0};
  double J{0.0};
  double J_hat{0.0};        // Dirichlet norm of w / J, 1 up to roundoff
  double window_norm{0.0};  // L2 norm of w / J on the window
};

/// Normalizes one perturbation. Throws DegenerateNormalization when J < 1e-14.
NormalizedEntry normalize_field(const Discretization& disc, const std::vector<double>& w, const RegionFn& window);

/// Normalized view of a Case II run on the window Omega^{window_t}; refuses
/// Case I runs (OutOfRange) unless `require_growth` is false.
std::vector<NormalizedEntry> normalized_view(const InvadingRun& run, double window_t = 2.0,
                                             bool require_growth = true);

struct ComparisonResult {
  bool hypotheses_hold{false};
  bool conclusion_holds{false};
  bool h_bound{true};    // h <= Psi(h') + phi / 2 everywhere
  bool phi_bound{true};  // phi >= 2 Psi(phi') everywhere
  bool endpoint{true};   // h(T) <= phi(T)
  double first_h_bound_failure{0.0};
  double first_phi_bound_failure{0.0};
  double max_violation{0.0};  // max (h - phi) over the grid
  std::string message;
};

/// h, phi sampled on a uniform grid over [t0, T]; derivatives by centered
/// differences (one-sided second order at the ends). Throws GridTooCoarse
/// with fewer than 16 samples.
ComparisonResult comparison_check(const std::vector<double>& h, const std::vector<double>& phi,
                                  const std::function<double(double)>& Psi, double t0, double T);

}  // namespace cpflow
