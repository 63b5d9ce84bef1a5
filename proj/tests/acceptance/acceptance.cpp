// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cpflow/config.hpp"
#include "cpflow/diagnostics.hpp"
#include "cpflow/error.hpp"
#include "support.hpp"

using namespace cpflow;
using namespace cpflow::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s [%s]\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

/// Runs a criterion body; exceptions count as failure.
void criterion(int id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(id, ok, what, detail);
  } catch (const std::exception& e) {
    report(id, false, what, std::string("exception: ") + e.what());
  }
}

double gauss5(const std::function<double(double)>& f, double h) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  double s = 0.0;
  for (int k = 0; k < 5; ++k) s += w[k] * f(0.5 * h * (x[k] + 1.0));
  return 0.5 * h * s;
}

/// A converged solve kept for the energy-identity sweep.
struct Solved {
  std::string label;
  CarrierField carrier;
  SolveResult result;
};

std::vector<Solved> solved;

CarrierField calibrated_carrier(const RunSpec& spec, double t, CarrierMode mode, double* eps_out = nullptr) {
  const ValidatedDomain d = validate_domain(spec.domain);
  double eps = spec.carrier.epsilon;
  if (spec.carrier.calibrate) {
    const EpsilonCalibration cal =
        calibrate_epsilon(outlet_flows(d), spec.carrier.window_a, spec.carrier.window_b, spec.carrier.samples,
                          *spec.carrier.seed, spec.carrier.target, spec.carrier.margin, spec.carrier.epsilon);
    eps = cal.epsilon;
  }
  if (eps_out) *eps_out = eps;
  CarrierField c = assemble_carrier(solve_corner_stokes(d, spec.delta), t, eps, mode);
  certify_discrete(c);
  return c;
}

}  // namespace

int main() {
  const RunSpec bridge = parse_config(source_path("configs/bridge.json"));
  const RunSpec fountain = parse_config(source_path("configs/fountain.json"));

  criterion(1, "channel flow is an exact discrete steady state", [] {
    const auto t0 = Clock::now();
    const CarrierField c = assemble_carrier(
        solve_corner_stokes(validate_domain(channel_spec(1.0, 0.1, 0.3, 0.5)), 1.0 / 32), 4.0, 0.5, CarrierMode::CP);
    const SolveResult r = solve_steady_ns(NSProblem{c.disc, c.vel, {}}, SolverOptions{});
    const double secs = seconds_since(t0);
    const ResidualNorms n = ns_residual(*c.disc, c.vel, r.field, nullptr);
    solved.push_back({"channel", c, r});
    const bool ok = n.momentum <= 1e-12 && r.J <= 1e-12 && secs < 5.0;
    return std::make_pair(ok, fmt("momentum=%.3g J=%.3g runtime=%.2fs (limits 1e-12, 1e-12, 5s)", n.momentum, r.J, secs));
  });

  criterion(2, "channel-flow coefficients and flux quadrature", [] {
    const CouettePoiseuille p = cp_from_data(1, 0, 0, 1);
    double shape = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double y = k / 100.0;
      shape = std::max(shape, std::abs(p.u(y) - 6.0 * (y - y * y)));
    }
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> hw(0.1, 3.0), val(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const CouettePoiseuille cp = cp_from_data(hw(rng), val(rng), val(rng), val(rng));
      worst = std::max(worst, std::abs(gauss5([&](double y) { return cp_eval(cp, y)[0]; }, cp.h) - cp.F));
    }
    const bool ok = p.A == -6.0 && p.B == 6.0 && shape <= 1e-14 && worst <= 1e-12;
    return std::make_pair(ok, fmt("A=%g B=%g profile=%.2g max|quad-F|=%.3g (limit 1e-12)", p.A, p.B, shape, worst));
  });

  double bridge_eps = bridge.carrier.epsilon;
  CarrierField bridge_hopf;
  criterion(3, "bridge carrier certification", [&] {
    bridge_hopf = calibrated_carrier(bridge, bridge.truncation, CarrierMode::Hopf, &bridge_eps);
    const CertificationReport& r = bridge_hopf.report;
    double fe = 0.0, fd = 0.0;
    for (double e : r.flux_error) fe = std::max(fe, e);
    for (double e : r.flux_drift) fd = std::max(fd, e);
    const bool ok = r.divergence_max <= 1e-14 && r.trace_error <= 1e-10 && fe <= 1e-10 && fd <= 1e-12;
    return std::make_pair(ok, fmt("div=%.3g trace=%.3g flux=%.3g drift=%.3g (limits 1e-14, 1e-10, 1e-10, 1e-12)",
                                  r.divergence_max, r.trace_error, fe, fd));
  });

  criterion(4, "Leray-Hopf sampling bound after calibration", [&] {
    const int samples = std::max(200, bridge.carrier.samples);
    const std::uint64_t seed = bridge.carrier.seed.value_or(7);
    const EpsilonCalibration cal =
        calibrate_epsilon(outlet_flows(validate_domain(bridge.domain)), 2.0, 10.0, samples, seed, 0.125, 2.0);
    const CarrierField c = assemble_carrier(solve_corner_stokes(validate_domain(bridge.domain), bridge.delta), 10.0,
                                            cal.epsilon, CarrierMode::Hopf);
    double ratio = 0.0, scale = 0.0;
    for (int j = 0; j < static_cast<int>(c.cps.size()); ++j) {
      const LerayHopfReport r = leray_hopf_certify(c, j, 2.0, 10.0, samples, seed);
      ratio = std::max(ratio, r.max_ratio);
      scale = std::max(scale, r.scale_error);
    }
    const bool ok = cal.passed && ratio <= 0.125 / 2.0 && scale <= 1e-10;
    return std::make_pair(ok, fmt("eps=%g max ratio=%.4g (limit 0.0625 = 0.125/2) scale error=%.3g (limit 1e-10) "
                                  "samples=%g",
                                  cal.epsilon, ratio, scale, samples));
  });

  criterion(5, "Hopf cut-off properties on 1e4 points", [] {
    bool ok = true;
    double worst = 0.0;
    for (double eps : {1.0, 0.5, 0.25}) {
      const HopfChecks c = hopf_property_check(eps, 10000);
      ok = ok && c.all() && c.points == 10000;
      worst = std::max(worst, c.max_slope_ratio);
    }
    return std::make_pair(ok, fmt("max |slope| * delta / eps = %.4g (limit 1)", worst));
  });

  criterion(6, "manufactured-solution convergence", [] {
    const auto t0 = Clock::now();
    double lo = 10.0, hi = 0.0;
    for (bool convect : {false, true}) {
      std::vector<double> err;
      for (int n : {16, 32, 64}) err.push_back(run_manufactured(n, convect).error);
      for (std::size_t k = 1; k < err.size(); ++k) {
        const double order = std::log2(err[k - 1] / err[k]);
        lo = std::min(lo, order);
        hi = std::max(hi, order);
      }
    }
    const double secs = seconds_since(t0);
    const bool ok = lo >= 1.8 && hi <= 2.2 && secs < 120.0;
    return std::make_pair(ok, fmt("orders in [%.3f, %.3f] (limits 2.0 +- 0.2) runtime=%.1fs (limit 120s)", lo, hi, secs));
  });

  criterion(8, "fountain growth bounds", [&] {
    const auto t0 = Clock::now();
    InvadingOptions opts;
    opts.delta = 1.0 / 16;
    opts.mode = fountain.carrier.mode;
    opts.epsilon = fountain.carrier.epsilon;
    opts.solver = fountain.solver;
    const InvadingRun run = run_invading(validate_domain(fountain.domain), Schedule::parse("2+4k,K=6"), opts);
    std::vector<double> slopes, slab(run.steps.size(), 0.0);
    for (const InvadingStep& s : run.steps) {
      if (!s.ok) throw Error(ErrorCode::NonConvergence, "fountain step " + std::to_string(s.k) + ": " + s.error);
      solved.push_back({"fountain k=" + std::to_string(s.k), s.carrier, s.result});
      const GrowthProfile g = growth_profile(s, integer_grid(s.t));
      if (s.k >= 1) slopes.push_back(g.c0);
      slab[s.k] = max_slab_energy(g, 1.0, s.t - 1.0);
    }
    double smin = slopes.front(), smax = slopes.front();
    for (double s : slopes) {
      smin = std::min(smin, s);
      smax = std::max(smax, s);
    }
    const double spread = (smax - smin) / smax;
    const double slab_change = std::abs(slab[6] - slab[3]) / slab[3];
    const double secs = seconds_since(t0);
    const bool ok = spread <= 0.10 && slab_change < 0.10 && secs < 600.0;
    return std::make_pair(ok, fmt("slope spread=%.4f (limit 0.10) slab change t3->t6=%.4f (limit 0.10) runtime=%.0fs "
                                  "(limit 600s)",
                                  spread, slab_change, secs));
  });

  criterion(9, "comparison lemma", [] {
    const auto id = [](double s) { return s; };
    const int n = 401;
    auto sample = [](const std::function<double(double)>& f, double a, double b, int m) {
      std::vector<double> v(m);
      for (int i = 0; i < m; ++i) v[i] = f(a + (b - a) * i / (m - 1));
      return v;
    };
    const auto phi = sample([](double t) { return 2 * t + 2; }, 1, 5, n);
    const ComparisonResult a = comparison_check(sample([](double t) { return t; }, 1, 5, n), phi, id, 1, 5);
    const ComparisonResult b = comparison_check(phi, phi, id, 1, 5);
    std::vector<double> h = phi;
    for (double& v : h) v += 1.0;
    const ComparisonResult c = comparison_check(h, phi, id, 1, 5);
    const bool hand = a.hypotheses_hold && a.conclusion_holds && b.conclusion_holds && b.max_violation == 0.0 &&
                      !c.hypotheses_hold && !c.endpoint;

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int accepted = 0, violations = 0, attempts = 0;
    while (accepted < 1000 && attempts < 500000) {
      ++attempts;
      const double k = 0.1 + 2.0 * U(rng), p = 1.0 + U(rng);
      const auto Psi = [=](double s) { return k * std::pow(std::max(s, 0.0), p); };
      const double a0 = 10.0 * U(rng), b0 = 2.0 * U(rng), c0 = 0.2 * U(rng);
      const auto ph = [=](double t) { return a0 + b0 * t + c0 * t * t; };
      const auto dph = [=](double t) { return b0 + 2 * c0 * t; };
      const double al = -5.0 + 15.0 * U(rng), be = -1.0 + 4.0 * U(rng), ga = 2.0 * U(rng), om = 0.5 + 2.5 * U(rng);
      const auto hh = [=](double t) { return al + be * t + ga * std::sin(om * t); };
      const auto dhh = [=](double t) { return be + ga * om * std::cos(om * t); };
      bool hyp = hh(5.0) <= ph(5.0);
      for (int i = 0; i <= 20000 && hyp; ++i) {
        const double t = 5.0 * i / 20000.0;
        hyp = hh(t) <= Psi(dhh(t)) + 0.5 * ph(t) - 1e-3 && ph(t) >= 2.0 * Psi(dph(t)) + 1e-3;
      }
      if (!hyp) continue;
      ++accepted;
      bool dense = true;
      for (int i = 0; i <= 20000; ++i) dense = dense && hh(5.0 * i / 20000.0) <= ph(5.0 * i / 20000.0);
      const ComparisonResult r = comparison_check(sample(hh, 0, 5, 2001), sample(ph, 0, 5, 2001), Psi, 0, 5);
      if (!dense || !r.hypotheses_hold || !r.conclusion_holds) ++violations;
    }
    const bool ok = hand && accepted == 1000 && violations == 0;
    return std::make_pair(ok, std::string(hand ? "hand examples ok, " : "hand examples wrong, ") +
                                  fmt("accepted triples=%g violations=%g (limit 0)", accepted, violations));
  });

  criterion(10, "small-data asymptotics on the bridge", [&] {
    const CarrierField c = calibrated_carrier(bridge, 16.0, CarrierMode::CP);
    const SolveResult r = solve_steady_ns(NSProblem{c.disc, c.vel, {}}, bridge.solver);
    solved.push_back({"bridge cp", c, r});
    const AsymptoticsReport rep = asymptotics_report(r, c);
    bool monotone = true;
    double worst = 0.0;
    for (const OutletAsymptotics& o : rep.outlets) {
      monotone = monotone && o.monotone_tail;
      worst = std::max(worst, o.final_dev / o.max_cp);
    }
    return std::make_pair(monotone && worst <= 0.01,
                          fmt("final sup deviation / max|CP| = %.3g (limit 0.01)", worst) +
                              (monotone ? ", monotone over the last 6 units" : ", tail not monotone"));
  });

  criterion(11, "small-data uniqueness on the bridge", [&] {
    if (bridge_hopf.vel.empty()) bridge_hopf = calibrated_carrier(bridge, bridge.truncation, CarrierMode::Hopf);
    const UniquenessResult u = uniqueness_experiment(bridge_hopf, bridge.solver, nullptr,
                                                     bridge.diagnostics.init_norm, bridge.carrier.seed.value_or(7));
    solved.push_back({"bridge hopf A", bridge_hopf, u.a});
    solved.push_back({"bridge hopf B", bridge_hopf, u.b});
    return std::make_pair(u.discrepancy <= 1e-8, fmt("discrepancy=%.3g (limit 1e-8) J=%.6g", u.discrepancy, u.J_a));
  });

  criterion(12, "Euler identity diagnostic", [] {
    auto rotation = [](int n) {
      return bernoulli_and_euler_identity(sample_center_field(
                                              n, n, 2.0 / n, {-1, -1}, [](Vec2 z) { return Vec2{-z.y, z.x}; },
                                              [](Vec2 z) { return 0.5 * (z.x * z.x + z.y * z.y); }))
          .residual;
    };
    double order = 10.0;
    double prev = rotation(16);
    for (int n : {32, 64}) {
      const double r = rotation(n);
      order = std::min(order, std::log2(prev / r));
      prev = r;
    }
    const double constant = bernoulli_and_euler_identity(
                                sample_center_field(
                                    16, 16, 1.0 / 16, {0, 0}, [](Vec2) { return Vec2{}; }, [](Vec2) { return 2.5; }))
                                .residual;
    const bool ok = order >= 1.8 && constant <= 1e-13;
    return std::make_pair(ok, fmt("rotation order=%.3f (limit 1.8) constant case residual=%.3g", order, constant));
  });

  criterion(13, "compatibility gate", [] {
    int rejected = 0, cases = 0;
    auto expect_reject = [&](const DomainSpec& s) {
      ++cases;
      try {
        validate_domain(s);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::FluxIncompatible) ++rejected;
      }
    };
    expect_reject(fountain_spec(2.0));
    DomainSpec s = fountain_spec();
    s.outlets[1].flux += 2e-12;
    expect_reject(s);
    s = bridge_spec();
    s.outlets[0].flux -= 1.5e-12;
    expect_reject(s);
    RunSpec r = parse_config(source_path("configs/fountain.json"));
    r.domain.outlets[2].flux *= 1.01;
    ++cases;
    try {
      validate(r);
    } catch (const ConfigError& e) {
      if (e.code() == ErrorCode::ValidationError) ++rejected;
    }
    bool valid_ok = true;
    try {
      validate_domain(fountain_spec());
      validate_domain(bridge_spec());
    } catch (const Error&) {
      valid_ok = false;
    }
    return std::make_pair(rejected == cases && valid_ok, fmt("rejected %g of %g violating configs", rejected, cases));
  });

  criterion(7, "energy identity on every converged solve", [] {
    double worst = 0.0, gauge = 0.0;
    int checks = 0, trivial = 0;
    for (const Solved& s : solved) {
      if (s.result.J <= 1e-10) {
        ++trivial;
        continue;
      }
      for (double t = 1.0; t <= s.carrier.trunc.t - 1.0 + 1e-9; t += 1.0) {
        const EnergyIdentity e = energy_identity_residual(s.result, s.carrier, nullptr, t);
        const EnergyIdentity g = energy_identity_residual(s.result, s.carrier, nullptr, t, 0.731);
        worst = std::max(worst, e.residual);
        gauge = std::max(gauge, std::abs(g.residual - e.residual));
        ++checks;
      }
    }
    const bool ok = checks > 0 && worst <= 1e-6 && gauge <= 1e-10;
    return std::make_pair(ok, fmt("max residual=%.3g (limit 1e-6) gauge shift change=%.3g over %g checks, %g "
                                  "zero-perturbation solves skipped",
                                  worst, gauge, checks, trivial));
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
