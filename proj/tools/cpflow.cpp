#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpflow/config.hpp"
#include "cpflow/diagnostics.hpp"
#include "cpflow/error.hpp"
#include "cpflow/field_io.hpp"
#include "cpflow/flux_carrier.hpp"
#include "cpflow/invading.hpp"

namespace fs = std::filesystem;
using namespace cpflow;

namespace {

enum Exit { kOk = 0, kAssert = 1, kUsage = 2, kNoConvergence = 3 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> delta;
  std::string mode;
  std::string schedule;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::string& provenance, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw Error(ErrorCode::InvalidSpec, "cannot write " + path.string());
    os_ << provenance << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os_ << (k ? "," : "") << cells[k];
    os_ << '\n';
    os_.flush();
  }

 private:
  std::ofstream os_;
};

struct Context {
  RunSpec spec;
  fs::path out;
  std::string provenance;
  ValidatedDomain domain;
  bool failed{false};

  Csv csv(const std::string& name, const std::vector<std::string>& header) const {
    return Csv(out / name, provenance, header);
  }

  void check(const std::string& what, bool ok, double value, double threshold) {
    std::printf("%s %s value=%s threshold=%s\n", ok ? "PASS" : "FAIL", what.c_str(), num(value).c_str(),
                num(threshold).c_str());
    if (!ok) failed = true;
  }
};

struct Carrier {
  CornerStokes corner;
  CarrierField field;
  std::optional<EpsilonCalibration> calibration;
};

Carrier build_carrier(Context& ctx, double t) {
  const RunSpec& s = ctx.spec;
  Carrier c{solve_corner_stokes(ctx.domain, s.delta), {}, std::nullopt};
  double eps = s.carrier.epsilon;
  if (s.carrier.calibrate && s.carrier.mode == CarrierMode::Hopf) {
    c.calibration = calibrate_epsilon(outlet_flows(ctx.domain), s.carrier.window_a, s.carrier.window_b,
                                      s.carrier.samples, *s.carrier.seed, s.carrier.target, s.carrier.margin,
                                      s.carrier.epsilon);
    eps = c.calibration->epsilon;
  }
  c.field = assemble_carrier(c.corner, t, eps, s.carrier.mode);
  return c;
}

SolveResult solve_on(const Carrier& c, const SolverOptions& opts) {
  NSProblem pb{c.field.disc, c.field.vel, {}};
  SolveResult r = solve_steady_ns(pb, opts);
  r.mode = to_string(c.field.mode);
  return r;
}

/// Roundoff of a face difference quotient: a few ulps of the largest
/// velocity divided by the spacing, never below 1e-14.
double divergence_floor(const CarrierField& c) {
  return std::max(1e-14, 8.0 * std::numeric_limits<double>::epsilon() * max_abs(c.vel) / c.grid->delta());
}

void certify(Context& ctx, const CarrierField& c) {
  const CertificationReport& r = c.report;
  double flux = 0.0, drift = 0.0;
  for (double v : r.flux_error) flux = std::max(flux, v);
  for (double v : r.flux_drift) drift = std::max(drift, v);
  const double div_tol = divergence_floor(c);
  ctx.check("carrier.divergence", r.divergence_max <= div_tol, r.divergence_max, div_tol);
  ctx.check("carrier.trace", r.trace_error <= 1e-10, r.trace_error, 1e-10);
  ctx.check("carrier.flux", flux <= 1e-10, flux, 1e-10);
  ctx.check("carrier.drift", drift <= 1e-12, drift, 1e-12);
}

void write_calibration(Context& ctx, const EpsilonCalibration& cal) {
  Csv f = ctx.csv("calibration.csv", {"outlet", "epsilon", "a", "b", "samples", "max_ratio", "mean_ratio",
                                      "max_hardy", "scale_error"});
  for (const LerayHopfReport& r : cal.reports)
    f.row({std::to_string(r.outlet), num(cal.epsilon), num(r.a), num(r.b), std::to_string(r.samples),
           num(r.max_ratio), num(r.mean_ratio), num(r.max_hardy), num(r.scale_error)});
  double worst = 0.0, scale = 0.0;
  for (const LerayHopfReport& r : cal.reports) {
    worst = std::max(worst, r.max_ratio);
    scale = std::max(scale, r.scale_error);
  }
  const double bound = ctx.spec.carrier.target / ctx.spec.carrier.margin;
  ctx.check("leray_hopf.ratio", cal.passed && worst <= bound, worst, bound);
  ctx.check("leray_hopf.scale", scale <= 1e-10, scale, 1e-10);
}

int cmd_exact(Context& ctx) {
  const double d = ctx.spec.delta;
  const std::vector<CouettePoiseuille> cps = outlet_flows(ctx.domain);
  Csv prof = ctx.csv("exact_profiles.csv", {"outlet", "y", "u_exact", "u_discrete", "stream_exact", "stream_discrete"});
  Csv sum = ctx.csv("exact_summary.csv", {"outlet", "h", "b0", "b1", "F", "A", "B", "pressure_slope",
                                          "flux_quadrature", "momentum_residual", "continuity_residual"});
  for (std::size_t j = 0; j < cps.size(); ++j) {
    const CouettePoiseuille& cp = cps[j];
    const DiscreteCP dcp = discrete_cp(cp, d);
    const StreamProfile sp = stream_profile(cp);
    for (int m = 0; m < dcp.n; ++m) {
      const double y = (m + 0.5) * d;
      prof.row({std::to_string(j), num(y), num(cp.u(y)), num(dcp.u[m]), num(sp(y)),
                num(0.5 * (dcp.stream[m] + dcp.stream[m + 1]))});
    }
    const int nx = static_cast<int>(std::lround(2.0 / d));
    MacGrid channel(nx, dcp.n, d, 0, 0, std::vector<CellType>(nx * dcp.n, CellType::Fluid));
    const CPResidual res = cp_discrete_residual(cp, channel);
    sum.row({std::to_string(j), num(cp.h), num(cp.b0), num(cp.b1), num(cp.F), num(cp.A), num(cp.B),
             num(cp.pressure_slope()), num(cp_flux(cp)), num(res.momentum), num(res.continuity)});
    ctx.check("exact.outlet" + std::to_string(j) + ".momentum", res.momentum <= 1e-12, res.momentum, 1e-12);
    const double ferr = std::abs(cp_flux(cp) - cp.F);
    ctx.check("exact.outlet" + std::to_string(j) + ".flux", ferr <= 1e-12, ferr, 1e-12);
  }
  return ctx.failed ? kAssert : kOk;
}

void write_carrier(Context& ctx, const Carrier& c) {
  const CertificationReport& r = c.field.report;
  Csv sum = ctx.csv("carrier_summary.csv", {"key", "value"});
  sum.row({"epsilon", num(c.field.epsilon)});
  sum.row({"mode", to_string(c.field.mode)});
  sum.row({"truncation", num(c.field.trunc.t)});
  sum.row({"corner_momentum", num(c.corner.residual.momentum)});
  sum.row({"corner_continuity", num(c.corner.residual.continuity)});
  sum.row({"divergence_max", num(r.divergence_max)});
  sum.row({"trace_error", num(r.trace_error)});
  Csv per = ctx.csv("carrier_outlets.csv", {"outlet", "flux_error", "flux_drift", "c1"});
  for (std::size_t j = 0; j < r.flux_error.size(); ++j)
    per.row({std::to_string(j), num(r.flux_error[j]), num(r.flux_drift[j]), num(r.c1[j])});
  write_field_file((ctx.out / "carrier.field").string(), *c.field.grid, c.field.vel,
                   std::vector<double>(c.field.grid->num_cells(), 0.0));
}

int cmd_carrier(Context& ctx) {
  const Carrier c = build_carrier(ctx, ctx.spec.truncation);
  write_carrier(ctx, c);
  certify(ctx, c.field);
  if (c.calibration) {
    write_calibration(ctx, *c.calibration);
  } else if (ctx.spec.carrier.samples > 0 && c.field.mode == CarrierMode::Hopf) {
    EpsilonCalibration once;
    once.epsilon = c.field.epsilon;
    once.passed = true;
    for (int j = 0; j < ctx.domain.num_outlets(); ++j) {
      once.reports.push_back(leray_hopf_certify(c.field, j, ctx.spec.carrier.window_a, ctx.spec.carrier.window_b,
                                                ctx.spec.carrier.samples, *ctx.spec.carrier.seed));
      if (once.reports.back().max_ratio > ctx.spec.carrier.target / ctx.spec.carrier.margin) once.passed = false;
    }
    write_calibration(ctx, once);
  }
  return ctx.failed ? kAssert : kOk;
}

void write_solution(Context& ctx, const SolveResult& r, const std::string& stem) {
  write_field_file((ctx.out / (stem + ".field")).string(), *r.field.grid, r.u, r.field.p);
  Csv hist = ctx.csv(stem + "_residual.csv", {"iteration", "phase", "scale", "momentum", "continuity"});
  for (const IterationRecord& h : r.history)
    hist.row({std::to_string(h.iteration), h.phase, num(h.scale), num(h.momentum), num(h.continuity)});
  Csv sum = ctx.csv(stem + "_summary.csv", {"key", "value"});
  sum.row({"mode", r.mode});
  sum.row({"J", num(r.J)});
  sum.row({"picard_iterations", std::to_string(r.picard_iterations)});
  sum.row({"newton_iterations", std::to_string(r.newton_iterations)});
  sum.row({"continuation_steps", std::to_string(r.continuation_steps)});
  sum.row({"momentum_residual", num(r.residual.momentum)});
  sum.row({"continuity_residual", num(r.residual.continuity)});
}

int cmd_solve(Context& ctx) {
  const Carrier c = build_carrier(ctx, ctx.spec.truncation);
  write_carrier(ctx, c);
  const SolveResult r = solve_on(c, ctx.spec.solver);
  write_solution(ctx, r, "solution");
  std::printf("solved t=%s J=%s residual=%s\n", num(ctx.spec.truncation).c_str(), num(r.J).c_str(),
              num(r.residual.combined()).c_str());
  return kOk;
}

int cmd_invade(Context& ctx) {
  const RunSpec& s = ctx.spec;
  if (s.schedule.t.empty()) throw Error(ErrorCode::InvalidSpec, "invade needs a schedule");
  InvadingOptions opts;
  opts.delta = s.delta;
  opts.mode = s.carrier.mode;
  opts.epsilon = s.carrier.epsilon;
  opts.solver = s.solver;
  const InvadingRun run = run_invading(ctx.domain, s.schedule, opts);
  Csv steps = ctx.csv("invade.csv", {"k", "t", "ok", "J", "picard", "newton", "residual", "c0", "c1", "max_slab", "error"});
  Csv growth = ctx.csv("growth.csv", {"k", "t_k", "t", "D", "e", "h"});
  bool nonconv = false;
  for (const InvadingStep& st : run.steps) {
    if (!st.ok) {
      nonconv = nonconv || st.failure == ErrorCode::NonConvergence;
      steps.row({std::to_string(st.k), num(st.t), "0", "nan", "0", "0", "nan", "nan", "nan", "nan", "\"" + st.error + "\""});
      continue;
    }
    const GrowthProfile gp = growth_profile(st, integer_grid(st.t));
    for (std::size_t i = 0; i < gp.t.size(); ++i)
      growth.row({std::to_string(st.k), num(st.t), num(gp.t[i]), num(gp.D[i]), num(gp.e[i]), num(gp.h[i])});
    steps.row({std::to_string(st.k), num(st.t), "1", num(st.result.J), std::to_string(st.result.picard_iterations),
               std::to_string(st.result.newton_iterations), num(st.result.residual.combined()), num(gp.c0),
               num(gp.c1), num(max_slab_energy(gp, 0.0, st.t)), ""});
  }
  Csv sum = ctx.csv("invade_summary.csv", {"key", "value"});
  sum.row({"schedule", "\"" + s.schedule.to_string() + "\""});
  sum.row({"regime", run.regime});
  std::printf("regime %s\n", run.regime.c_str());
  return nonconv ? kNoConvergence : kOk;
}

void energy_checks(Context& ctx, const SolveResult& r, const CarrierField& cf, double T) {
  if (r.J <= 1e-10) {
    std::printf("SKIP energy: perturbation vanishes (J=%s)\n", num(r.J).c_str());
    return;
  }
  Csv f = ctx.csv("energy.csv", {"t", "lhs", "rhs", "residual", "shifted_residual"});
  double worst = 0.0, shift = 0.0;
  std::vector<double> ts;
  for (int t = 1; t <= static_cast<int>(std::floor(T - 1.0 + 1e-9)); ++t) ts.push_back(t);
  ts.push_back(0.5 * T);
  for (double t : ts) {
    const EnergyIdentity e = energy_identity_residual(r, cf, nullptr, t);
    const EnergyIdentity es = energy_identity_residual(r, cf, nullptr, t, 0.731);
    f.row({num(t), num(e.lhs), num(e.rhs), num(e.residual), num(es.residual)});
    worst = std::max({worst, e.residual, es.residual});
    shift = std::max(shift, std::abs(e.residual - es.residual));
  }
  const double tol = ctx.spec.diagnostics.energy_tolerance;
  ctx.check("energy.identity", worst <= tol, worst, tol);
  ctx.check("energy.gauge", shift <= tol, shift, tol);
}

void asymptotic_checks(Context& ctx, const SolveResult& r, const CarrierField& cf) {
  AsymptoticsOptions ao;
  ao.final_threshold = ctx.spec.diagnostics.final_threshold;
  const AsymptoticsReport rep = asymptotics_report(r, cf, ao);
  Csv prof = ctx.csv("asymptotics.csv", {"outlet", "x", "sup_dev"});
  Csv slab = ctx.csv("asymptotics_slabs.csv", {"outlet", "tau", "dirichlet_dev"});
  for (const OutletAsymptotics& o : rep.outlets) {
    for (std::size_t k = 0; k < o.x.size(); ++k) prof.row({std::to_string(o.outlet), num(o.x[k]), num(o.sup_dev[k])});
    for (std::size_t k = 0; k < o.slab_start.size(); ++k)
      slab.row({std::to_string(o.outlet), num(o.slab_start[k]), num(o.slab_dev[k])});
    const std::string tag = "asymptotics.outlet" + std::to_string(o.outlet);
    ctx.check(tag + ".monotone", o.monotone_tail, o.monotone_tail ? 1.0 : 0.0, 1.0);
    ctx.check(tag + ".final", o.final_ok, o.final_dev, ao.final_threshold * o.max_cp);
  }
}

void asymptotics_for(Context& ctx, const Carrier& c, const SolveResult& r) {
  if (c.field.mode == CarrierMode::CP) return asymptotic_checks(ctx, r, c.field);
  Carrier cp = c;
  cp.field = assemble_carrier(c.corner, c.field.trunc.t, c.field.epsilon, CarrierMode::CP);
  asymptotic_checks(ctx, solve_on(cp, ctx.spec.solver), cp.field);
}

void uniqueness_checks(Context& ctx, const CarrierField& cf) {
  const DiagnosticsConfig& dg = ctx.spec.diagnostics;
  const double amp = data_amplitude(ctx.spec.domain);
  if (amp > dg.small_data_threshold) {
    std::printf("SKIP uniqueness: data amplitude %s above small-data threshold %s\n", num(amp).c_str(),
                num(dg.small_data_threshold).c_str());
    return;
  }
  const std::uint64_t seed = ctx.spec.carrier.seed.value_or(0);
  const UniquenessResult u = uniqueness_experiment(cf, ctx.spec.solver, nullptr, dg.init_norm, seed);
  Csv f = ctx.csv("uniqueness.csv", {"discrepancy", "J_a", "J_b"});
  f.row({num(u.discrepancy), num(u.J_a), num(u.J_b)});
  ctx.check("uniqueness.discrepancy", u.discrepancy <= dg.uniqueness_tolerance, u.discrepancy,
            dg.uniqueness_tolerance);
}

void sweep(Context& ctx) {
  const DiagnosticsConfig& dg = ctx.spec.diagnostics;
  if (dg.sweep.empty()) return;
  const UniquenessSweep sw =
      uniqueness_sweep(ctx.spec.domain, dg.sweep, ctx.spec.delta, ctx.spec.truncation, ctx.spec.carrier.mode,
                       ctx.spec.carrier.epsilon, ctx.spec.solver, ctx.spec.carrier.seed.value_or(0));
  Csv f = ctx.csv("uniqueness_sweep.csv", {"amplitude", "discrepancy", "converged"});
  for (const SweepRow& r : sw.rows) f.row({num(r.amplitude), num(r.discrepancy), r.converged ? "1" : "0"});
  std::printf("sweep first divergent amplitude %s\n", sw.first_divergent > 0.0 ? num(sw.first_divergent).c_str() : "none");
}

void bernoulli(Context& ctx, const SolveResult& r) {
  const CenterField cf = to_centers(r.field, r.u);
  const EulerIdentity e = bernoulli_and_euler_identity(cf);
  const MacGrid& g = *r.field.grid;
  Csv f = ctx.csv("bernoulli.csv", {"x", "y", "phi"});
  for (int c : g.fluid_cells()) {
    const Vec2 z = g.cell_center(c);
    f.row({num(z.x), num(z.y), num(e.phi[c])});
  }
}

int cmd_diagnose(Context& ctx) {
  const RunSpec& s = ctx.spec;
  const Carrier c = build_carrier(ctx, s.truncation);
  const SolveResult r = solve_on(c, s.solver);
  write_solution(ctx, r, "solution");
  if (s.diagnostics.energy) energy_checks(ctx, r, c.field, s.truncation);
  if (s.diagnostics.asymptotics) {
    if (s.truncation >= 12.0) {
      asymptotics_for(ctx, c, r);
    } else {
      std::printf("SKIP asymptotics: truncation %s below 12\n", num(s.truncation).c_str());
    }
  }
  if (s.diagnostics.uniqueness) uniqueness_checks(ctx, c.field);
  bernoulli(ctx, r);
  sweep(ctx);
  return ctx.failed ? kAssert : kOk;
}

int cmd_verify(Context& ctx) {
  const RunSpec& s = ctx.spec;
  ctx.check("domain.compatibility", std::abs(ctx.domain.compatibility_residual()) <= 1e-12 * ctx.domain.compatibility_scale(),
            std::abs(ctx.domain.compatibility_residual()), 1e-12 * ctx.domain.compatibility_scale());
  for (double eps : {1.0, 0.5, 0.25, s.carrier.epsilon}) {
    const HopfChecks h = hopf_property_check(eps);
    ctx.check("hopf.eps" + num(eps), h.all(), h.max_slope_ratio, 1.0);
  }
  cmd_exact(ctx);
  const Carrier c = build_carrier(ctx, s.truncation);
  certify(ctx, c.field);
  if (c.calibration) write_calibration(ctx, *c.calibration);
  const SolveResult r = solve_on(c, s.solver);
  ctx.check("solve.residual", r.residual.combined() <= s.solver.tolerance, r.residual.combined(), s.solver.tolerance);
  energy_checks(ctx, r, c.field, s.truncation);
  if (s.diagnostics.uniqueness) uniqueness_checks(ctx, c.field);
  if (s.diagnostics.asymptotics && s.truncation >= 12.0) asymptotics_for(ctx, c, r);
  std::vector<double> res;
  for (int n : {16, 32, 64}) {
    const double d = 2.0 / n;
    const CenterField f = sample_center_field(
        n, n, d, {-1.0, -1.0}, [](Vec2 z) { return Vec2{-z.y, z.x}; },
        [](Vec2 z) { return 0.5 * (z.x * z.x + z.y * z.y); });
    res.push_back(bernoulli_and_euler_identity(f).residual);
  }
  const double order = std::log2(res[1] / res[2]);
  ctx.check("euler.order", order >= 1.8, order, 1.8);
  return ctx.failed ? kAssert : kOk;
}

std::optional<RunSpec> load(const Overrides& ov) {
  if (ov.config.empty()) {
    std::fprintf(stderr, "error: --config (or CPFLOW_CONFIG) is required\n");
    return std::nullopt;
  }
  try {
    RunSpec s = parse_config(ov.config, false);
    if (ov.seed) s.carrier.seed = *ov.seed;
    if (!ov.out.empty()) s.output = ov.out;
    if (ov.delta) s.delta = *ov.delta;
    if (!ov.mode.empty()) s.carrier.mode = parse_carrier_mode(ov.mode);
    if (!ov.schedule.empty()) s.schedule = Schedule::parse(ov.schedule);
    validate(s);
    return s;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s:\n", std::string(to_string(e.code())).c_str());
    for (const ConfigIssue& i : e.issues())
      std::fprintf(stderr, "  %s%s: %s\n", i.line > 0 ? ("line " + std::to_string(i.line) + " ").c_str() : "",
                   i.key.c_str(), i.reason.c_str());
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpflow: steady Navier-Stokes flows in channel junctions"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1, 1);
  app.fallthrough();
  Overrides ov;
  app.add_option("--config", ov.config, "run configuration (JSON)")->envname("CPFLOW_CONFIG");
  app.add_option("--seed", ov.seed, "random seed for sampled checks")->envname("CPFLOW_SEED");
  app.add_option("--out", ov.out, "output directory")->envname("CPFLOW_OUT");
  app.add_option("--delta", ov.delta, "grid spacing")->envname("CPFLOW_DELTA");
  app.add_option("--mode", ov.mode, "carrier mode")->check(CLI::IsMember({"hopf", "cp"}))->envname("CPFLOW_MODE");
  app.add_option("--schedule", ov.schedule, "truncations, e.g. \"2+4k,K=6\"")->envname("CPFLOW_SCHEDULE");

  const std::map<std::string, std::pair<const char*, int (*)(Context&)>> commands = {
      {"exact", {"channel flows of every outlet", cmd_exact}},
      {"carrier", {"assemble and certify the flux carrier", cmd_carrier}},
      {"solve", {"steady solve on the configured truncation", cmd_solve}},
      {"invade", {"solve along the truncation schedule", cmd_invade}},
      {"diagnose", {"energy, asymptotics and uniqueness diagnostics", cmd_diagnose}},
      {"verify", {"full property suite", cmd_verify}},
  };
  for (const auto& [name, cmd] : commands) app.add_subcommand(name, cmd.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  const std::optional<RunSpec> spec = load(ov);
  if (!spec) return kUsage;
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Context ctx{*spec, fs::path(spec->output), "", validate_domain(spec->domain)};
    ctx.provenance = "# cpflow " + version() + " config=" + config_hash(*spec);
    fs::create_directories(ctx.out);
    std::ofstream(ctx.out / "config.json") << serialize(*spec);
    return commands.at(name).second(ctx);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return e.code() == ErrorCode::NonConvergence ? kNoConvergence : kAssert;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kAssert;
  }
}
