#include <gtest/gtest.h>

#include <random>

#include "cpflow/diagnostics.hpp"
#include "cpflow/error.hpp"
#include "cpflow/invading.hpp"
#include "support.hpp"

using namespace cpflow;
using namespace cpflow::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidSpec;
}

std::vector<double> sample(const std::function<double(double)>& f, double t0, double T, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = f(t0 + (T - t0) * i / (n - 1));
  return v;
}

}  // namespace

TEST(Schedule, Formula) {
  const Schedule s = Schedule::parse("2+4k,K=6");
  EXPECT_EQ(s.t, (std::vector<double>{2, 6, 10, 14, 18, 22, 26}));
  EXPECT_EQ(Schedule::parse(" 2 + 4k , K = 6 "), s);
  EXPECT_EQ(Schedule::parse(s.to_string()), s);
  EXPECT_EQ(Schedule::linear(2, 4, 6), s);
}

TEST(Schedule, ExplicitList) {
  EXPECT_EQ(Schedule::parse("2,6,10").t, (std::vector<double>{2, 6, 10}));
  const Schedule s = Schedule::parse("1.5,3");
  EXPECT_EQ(Schedule::parse(s.to_string()), s);
}

TEST(Schedule, Malformed) {
  for (const char* bad : {"", "abc", "3,2", "2,2", "2+4k,K=-1", "2,x", "-1,2", "2+4q,K=3"})
    EXPECT_EQ(code_of([&] { Schedule::parse(bad); }), ErrorCode::ParseError) << bad;
}

TEST(Regime, Classification) {
  EXPECT_EQ(classify_regime({1, 1.1, 1.21, 1.34}), "II");
  EXPECT_EQ(classify_regime({1, 1.01, 1.02, 1.03, 1.031}), "I");
  EXPECT_EQ(classify_regime({1, 2, 3, 3, 3}), "I");
  EXPECT_EQ(classify_regime({0, 0, 0, 0}), "I");
  EXPECT_EQ(classify_regime({1, 1, 2, 4, 8}), "II");
  EXPECT_EQ(classify_regime({}), "I");
}

TEST(Comparison, HandExamples) {
  const auto id = [](double s) { return s; };
  const int n = 401;
  const ComparisonResult a =
      comparison_check(sample([](double t) { return t; }, 1, 5, n), sample([](double t) { return 2 * t + 2; }, 1, 5, n),
                       id, 1.0, 5.0);
  EXPECT_TRUE(a.hypotheses_hold) << a.message;
  EXPECT_TRUE(a.conclusion_holds);

  const auto phi = sample([](double t) { return 2 * t + 2; }, 1, 5, n);
  const ComparisonResult b = comparison_check(phi, phi, id, 1.0, 5.0);
  EXPECT_TRUE(b.conclusion_holds);
  EXPECT_EQ(b.max_violation, 0.0);

  std::vector<double> h = phi;
  for (double& v : h) v += 1.0;
  const ComparisonResult c = comparison_check(h, phi, id, 1.0, 5.0);
  EXPECT_FALSE(c.hypotheses_hold);
  EXPECT_FALSE(c.endpoint);
  EXPECT_NE(c.message.find("t=5"), std::string::npos) << c.message;
}

TEST(Comparison, TooCoarse) {
  const std::vector<double> v(15, 1.0);
  EXPECT_EQ(code_of([&] { comparison_check(v, v, [](double s) { return s; }, 0, 1); }), ErrorCode::GridTooCoarse);
}

TEST(Comparison, RandomizedAgainstDenseOracle) {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int accepted = 0, attempts = 0;
  const double t0 = 0.0, T = 5.0;
  while (accepted < 1000 && attempts < 200000) {
    ++attempts;
    const double k = 0.1 + 2.0 * U(rng), p = 1.0 + U(rng);
    const auto Psi = [=](double s) { return k * std::pow(std::max(s, 0.0), p); };
    const double a = 10.0 * U(rng), b = 2.0 * U(rng), c = 0.2 * U(rng);
    const auto phi = [=](double t) { return a + b * t + c * t * t; };
    const auto dphi = [=](double t) { return b + 2 * c * t; };
    const double al = -5.0 + 15.0 * U(rng), be = -1.0 + 4.0 * U(rng), ga = 2.0 * U(rng), om = 0.5 + 2.5 * U(rng);
    const auto h = [=](double t) { return al + be * t + ga * std::sin(om * t); };
    const auto dh = [=](double t) { return be + ga * om * std::cos(om * t); };

    bool hyp = h(T) <= phi(T);
    bool concl = true;
    for (int i = 0; i <= 20000 && hyp; ++i) {
      const double t = t0 + (T - t0) * i / 20000.0;
      hyp = h(t) <= Psi(dh(t)) + 0.5 * phi(t) - 1e-6 && phi(t) >= 2.0 * Psi(dphi(t)) + 1e-6;
      concl = concl && h(t) <= phi(t);
    }
    if (!hyp) continue;
    ++accepted;
    EXPECT_TRUE(concl) << "dense oracle found a counterexample";
    const ComparisonResult r = comparison_check(sample(h, t0, T, 2001), sample(phi, t0, T, 2001), Psi, t0, T);
    EXPECT_TRUE(r.hypotheses_hold) << r.message;
    EXPECT_TRUE(r.conclusion_holds);
  }
  EXPECT_EQ(accepted, 1000);
}

TEST(Growth, ChannelFlowEnergyIsLinear) {
  const double F = 0.6, delta = 1.0 / 32, t = 6.0;
  const CornerStokes cs = solve_corner_stokes(validate_domain(channel_spec(1.0, 0.0, 0.0, F)), delta);
  InvadingStep step;
  step.t = t;
  step.carrier = assemble_carrier(cs, t, 0.5, CarrierMode::CP);
  step.result.field = StaggeredField(step.carrier.grid);
  step.result.field.vel = step.carrier.vel;
  const GrowthProfile g = growth_profile(step, integer_grid(t));
  EXPECT_TRUE(g.monotone);
  // Per unit length of a Poiseuille channel: int (u')^2 = 12 F^2 / h^3, two outlets.
  const double slope = 2.0 * 12.0 * F * F;
  // Slabs away from the cap.
  for (std::size_t i = 2; i + 1 < g.t.size(); ++i) {
    EXPECT_NEAR(g.e[i], g.e[2], 1e-10 * slope);
    EXPECT_NEAR(g.e[i], slope, 4.0 * delta * delta * slope);
  }
  EXPECT_NEAR(g.c0, g.e[2], 1e-9 * slope);
}

TEST(Growth, ZeroFieldAndRange) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec()), 0.125);
  InvadingStep step;
  step.carrier = assemble_carrier(cs, 4.0, 0.5, CarrierMode::Hopf);
  step.result.field = StaggeredField(step.carrier.grid);
  const GrowthProfile g = growth_profile(step, integer_grid(4.0));
  for (double d : g.D) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(code_of([&] { growth_profile(step, {5.0}); }), ErrorCode::OutOfRange);
}

TEST(Invading, StraightChannelIsCaseOne) {
  InvadingOptions opts;
  opts.delta = 1.0 / 8;
  opts.mode = CarrierMode::CP;
  const InvadingRun run = run_invading(validate_domain(channel_spec(1.0, 0.0, 0.2, 0.3)), Schedule::parse("2,4,6"), opts);
  ASSERT_EQ(run.steps.size(), 3u);
  for (const InvadingStep& s : run.steps) {
    EXPECT_TRUE(s.ok) << s.error;
    EXPECT_LE(s.result.J, 1e-12);
  }
  EXPECT_EQ(run.regime, "I");
  EXPECT_EQ(code_of([&] { normalized_view(run); }), ErrorCode::OutOfRange);
}

TEST(Invading, BridgeSmallDataConverges) {
  InvadingOptions opts;
  opts.delta = 1.0 / 8;
  opts.mode = CarrierMode::CP;
  const InvadingRun run = run_invading(validate_domain(bridge_spec()), Schedule::parse("2+4k,K=3"), opts);
  std::vector<double> J;
  for (const InvadingStep& s : run.steps) {
    ASSERT_TRUE(s.ok) << s.error;
    J.push_back(s.result.J);
    const GrowthProfile g = growth_profile(s, integer_grid(s.t));
    EXPECT_TRUE(g.monotone);
    EXPECT_NEAR(g.D.back(), s.result.J * s.result.J, 1e-12 * g.D.back());
  }
  EXPECT_EQ(run.regime, "I");
  EXPECT_LE(std::abs(J[3] - J[2]) / J[3], 0.01);

  // Nested solutions agree more closely on a fixed inner window as k grows.
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < run.steps.size(); ++k) {
    const InvadingStep& a = run.steps[k];
    const InvadingStep& b = run.steps[k + 1];
    double s = 0.0;
    for (int gid : a.carrier.grid->unknown_faces()) {
      const Vec2 p = a.carrier.grid->face_center(gid);
      if (!a.carrier.trunc.in_truncation(p, a.t - 2.0)) continue;
      const int gb = b.carrier.grid->find_face(p, a.carrier.grid->component(gid));
      const double d = a.result.u[gid] - b.result.u[gb];
      s += d * d;
    }
    const double floor = 1e-12;
    EXPECT_LE(std::sqrt(s), std::max(prev, floor));
    prev = std::sqrt(s);
  }
}

TEST(Normalized, SyntheticMultiplesOfOneField) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec()), 0.125);
  const CarrierField c = assemble_carrier(cs, 4.0, 0.5, CarrierMode::Hopf);
  const std::vector<double> phi = random_solenoidal(*c.disc, 1.0, 5);
  InvadingRun run;
  run.regime = "II";
  for (int k = 1; k <= 4; ++k) {
    InvadingStep s;
    s.k = k;
    s.ok = true;
    s.carrier = c;
    s.result.field = StaggeredField(c.grid);
    for (std::size_t i = 0; i < phi.size(); ++i) s.result.field.vel[i] = k * phi[i];
    run.steps.push_back(s);
  }
  const std::vector<NormalizedEntry> v = normalized_view(run);
  ASSERT_EQ(v.size(), 4u);
  for (const NormalizedEntry& e : v) {
    EXPECT_NEAR(e.J_hat, 1.0, 1e-12);
    EXPECT_NEAR(e.window_norm, v[0].window_norm, 1e-12);
    EXPECT_NEAR(e.J, e.k * v[0].J, 1e-12 * e.J);
  }
  EXPECT_EQ(code_of([&] { normalize_field(*c.disc, std::vector<double>(phi.size(), 0.0), {}); }),
            ErrorCode::DegenerateNormalization);
}
