#include <gtest/gtest.h>

#include <cmath>

#include "cpflow/error.hpp"
#include "cpflow/flux_carrier.hpp"
#include "support.hpp"

using namespace cpflow;
using namespace cpflow::testing;

TEST(HopfPsi, Examples) {
  EXPECT_LE(0.05, 0.5 * std::exp(-2.0));
  EXPECT_EQ(hopf_psi(1.0, 0.05), 1.0);
  EXPECT_GE(0.2, std::exp(-2.0) + 0.5 * std::exp(-4.0));
  EXPECT_EQ(hopf_psi(0.5, 0.2), 0.0);
  const double v = hopf_psi(1.0, 0.2);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
  const double h = 1e-7;
  const double slope = (hopf_psi(1.0, 0.2 + h) - hopf_psi(1.0, 0.2 - h)) / (2 * h);
  EXPECT_LE(std::abs(slope), 1.0 / 0.2);
}

TEST(HopfPsi, Thresholds) {
  for (double eps : {1.0, 0.5, 0.25}) {
    const HopfCutoff c = make_hopf_cutoff(eps);
    EXPECT_DOUBLE_EQ(c.a_thr, 0.5 * std::exp(-2.0 / eps));
    EXPECT_DOUBLE_EQ(c.b_thr, std::exp(-1.0 / eps) + 0.5 * std::exp(-2.0 / eps));
    EXPECT_GT(std::log(c.b_thr / c.a_thr), 1.0 / eps);
  }
}

TEST(HopfPsi, BadEpsilon) {
  for (double eps : {0.0, -0.5, 1.5, std::nan("")}) {
    try {
      hopf_psi(eps, 0.1);
      FAIL() << eps;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadEpsilon);
    }
  }
}

TEST(HopfPsi, PropertiesOnFineGrids) {
  for (double eps : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
    for (int pts : {1000, 10000, 100000}) {
      const HopfChecks c = hopf_property_check(eps, pts);
      EXPECT_TRUE(c.all()) << "eps " << eps << " points " << pts;
      EXPECT_LE(c.max_slope_ratio, 1.0);
    }
  }
}

TEST(HopfPsi, MonotoneAndBoundedIndependently) {
  for (double eps : {1.0, 0.3, 0.1}) {
    const HopfCutoff c = make_hopf_cutoff(eps);
    double prev = 1.0;
    for (int k = 1; k <= 20000; ++k) {
      const double d = 2.0 * c.b_thr * k / 20000.0;
      const double v = c(d);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      ASSERT_LE(v, prev);
      ASSERT_LE(std::abs(c.derivative(d)), eps / d * (1 + 1e-12));
      prev = v;
    }
  }
}

TEST(OutletCarrier, TraceMidChannelFlux) {
  const CouettePoiseuille cp = cp_from_data(1.0, 0.2, -0.1, 0.3);
  const OutletCarrier oc = outlet_carrier(cp, 0.5);
  EXPECT_NEAR(oc.velocity(0.0), 0.2, 1e-14);
  EXPECT_NEAR(oc.velocity(1.0), -0.1, 1e-14);
  EXPECT_EQ(oc.velocity(0.5), 0.0);
  EXPECT_NEAR(oc.stream(1.0) - oc.stream(0.0), 0.3, 1e-14);
  const std::vector<double> col = outlet_carrier_column(oc, 1.0 / 64);
  double flux = 0.0;
  for (double v : col) flux += v / 64.0;
  EXPECT_NEAR(flux, 0.3, 1e-14);
}

TEST(CornerStokes, StraightStripIsChannelFlow) {
  const double delta = 1.0 / 16;
  const CornerStokes cs = solve_corner_stokes(validate_domain(channel_spec(1.0, 0.0, 0.0, 0.5)), delta);
  EXPECT_LE(cs.residual.combined(), 1e-10);
  const DiscreteCP d = discrete_cp(cp_from_data(1.0, 0.0, 0.0, 0.5), delta);
  for (int gid : cs.grid->unknown_faces()) {
    if (cs.grid->component(gid) == 0)
      EXPECT_NEAR(cs.field.vel[gid], d.u_at(cs.grid->face_center(gid).y), 1e-12);
    else
      EXPECT_NEAR(cs.field.vel[gid], 0.0, 1e-12);
  }
}

TEST(CornerStokes, ZeroData) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec(0.0, 0.0)), 0.125);
  EXPECT_EQ(max_abs(cs.field.vel), 0.0);
}

TEST(CornerStokes, BridgeNetFluxZero) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec()), 1.0 / 16);
  EXPECT_LE(cs.residual.combined(), 1e-10);
  EXPECT_LE(std::abs(cs.disc->boundary_flux(cs.field.vel)), 1e-14);
  double sum = 0.0;
  for (double d : cs.disc->divergence(cs.field.vel)) sum += d;
  EXPECT_LE(std::abs(sum), 1e-10);
}

TEST(Assemble, StripInCpModeIsChannelFlow) {
  const double delta = 1.0 / 16;
  const CornerStokes cs = solve_corner_stokes(validate_domain(channel_spec(1.0, 0.1, 0.3, 0.5)), delta);
  const CarrierField c = assemble_carrier(cs, 5.0, 0.5, CarrierMode::CP);
  const DiscreteCP d = discrete_cp(cp_from_data(1.0, 0.1, 0.3, 0.5), delta);
  for (int gid = 0; gid < c.grid->num_faces(); ++gid) {
    if (c.grid->face_type(gid) == FaceType::Inactive) continue;
    const double want = c.grid->component(gid) == 0 ? d.u_at(c.grid->face_center(gid).y) : 0.0;
    EXPECT_NEAR(c.vel[gid], want, 1e-12);
  }
}

TEST(Assemble, BridgeCertification) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec()), 1.0 / 16);
  for (CarrierMode mode : {CarrierMode::Hopf, CarrierMode::CP}) {
    CarrierField c = assemble_carrier(cs, 8.0, 0.5, mode);
    certify_discrete(c);
    const CertificationReport& r = c.report;
    EXPECT_LE(r.divergence_max, 1e-14);
    EXPECT_LE(r.trace_error, 1e-10);
    ASSERT_EQ(r.flux_error.size(), 2u);
    for (double e : r.flux_error) EXPECT_LE(e, 1e-10);
    for (double e : r.flux_drift) EXPECT_LE(e, 1e-12);
    for (double e : r.c1) EXPECT_LE(std::abs(e), 1e-10);
    for (int j = 0; j < 2; ++j) {
      const double F = c.trunc.domain.outlets()[j].flux;
      for (double x = 0.0; x <= 8.0; x += 0.25)
        EXPECT_NEAR(cross_section(c.trunc, *c.grid, j, x).flux(c.vel), F, 1e-12);
    }
  }
}

TEST(Assemble, HopfVanishesAwayFromWalls) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec()), 1.0 / 16);
  const CarrierField c = assemble_carrier(cs, 6.0, 0.5, CarrierMode::Hopf);
  const HopfCutoff cut = make_hopf_cutoff(0.5);
  for (int gid : c.grid->unknown_faces()) {
    const Region r = c.trunc.domain.locate(c.grid->face_center(gid));
    if (r.outlet < 0 || r.x < 2.5) continue;
    const double dist = std::min(r.y, 1.0 - r.y);
    if (dist > cut.b_thr + 2.0 / 16) EXPECT_NEAR(c.vel[gid], 0.0, 1e-14);
  }
}

TEST(LerayHopf, DeterministicAndScaleInvariant) {
  const CornerStokes cs = solve_corner_stokes(validate_domain(bridge_spec()), 1.0 / 16);
  const CarrierField c = assemble_carrier(cs, 10.0, 0.5, CarrierMode::Hopf);
  const LerayHopfReport a = leray_hopf_certify(c, 1, 2.0, 10.0, 20, 99);
  const LerayHopfReport b = leray_hopf_certify(c, 1, 2.0, 10.0, 20, 99);
  EXPECT_EQ(a.max_ratio, b.max_ratio);
  EXPECT_EQ(a.mean_ratio, b.mean_ratio);
  EXPECT_LE(a.scale_error, 1e-12);
  EXPECT_GT(a.max_hardy, 0.0);
  EXPECT_TRUE(std::isfinite(a.max_hardy));
  try {
    leray_hopf_certify(c, 0, 1.0, 10.0, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(LerayHopf, CalibratedBridgeMeetsTarget) {
  const ValidatedDomain d = validate_domain(bridge_spec());
  const EpsilonCalibration cal = calibrate_epsilon(outlet_flows(d), 2.0, 10.0, 100, 7);
  ASSERT_TRUE(cal.passed);
  for (const LerayHopfReport& r : cal.reports) EXPECT_LE(r.max_ratio, 0.125);
  const CarrierField c = assemble_carrier(solve_corner_stokes(d, 1.0 / 16), 10.0, cal.epsilon, CarrierMode::Hopf);
  for (int j = 0; j < 2; ++j) EXPECT_LE(leray_hopf_certify(c, j, 2.0, 10.0, 100, 7).max_ratio, 0.125);
}

TEST(LerayHopf, SmallDataChannelFlow) {
  const CouettePoiseuille cp = cp_from_data(1.0, 0.0, 0.01, 0.005);
  const OutletCarrier oc{cp, {}, false};
  EXPECT_LE(leray_hopf_certify(oc, 0, 2.0, 10.0, 50, 3).max_ratio, 0.125);
}

TEST(CarrierMode, Parse) {
  EXPECT_EQ(parse_carrier_mode("hopf"), CarrierMode::Hopf);
  EXPECT_EQ(parse_carrier_mode("cp"), CarrierMode::CP);
  EXPECT_EQ(to_string(CarrierMode::CP), "cp");
  EXPECT_THROW(parse_carrier_mode("stokes"), Error);
}
