#include "cpflow/flux_carrier.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cpflow/error.hpp"

namespace cpflow {

std::string to_string(CarrierMode m) { return m == CarrierMode::Hopf ? "hopf" : "cp"; }

CarrierMode parse_carrier_mode(const std::string& s) {
  if (s == "hopf") return CarrierMode::Hopf;
  if (s == "cp") return CarrierMode::CP;
  throw Error(ErrorCode::InvalidSpec, "unknown carrier mode '" + s + "'");
}

namespace {

double clamp_ramp(double s, double w) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double k = 1.0 / (1.0 - w);
  if (s < w) return k * s * s / (2.0 * w);
  if (s <= 1.0 - w) return k * (s - 0.5 * w);
  const double r = 1.0 - s;
  return 1.0 - k * r * r / (2.0 * w);
}

double clamp_ramp_slope(double s, double w) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double k = 1.0 / (1.0 - w);
  if (s < w) return k * s / w;
  if (s <= 1.0 - w) return k;
  return k * (1.0 - s) / w;
}

double smoothstep_cut(double x) {
  if (x <= 0.5) return 1.0;
  if (x >= 1.5) return 0.0;
  const double r = x - 0.5;
  return 1.0 - r * r * r * (r * (6.0 * r - 15.0) + 10.0);
}

}  // namespace

double HopfCutoff::operator()(double delta) const {
  if (delta <= a_thr) return 1.0;
  if (delta >= b_thr) return 0.0;
  return clamp_ramp(std::log(b_thr / delta) / log_ratio, blend);
}

double HopfCutoff::derivative(double delta) const {
  if (delta <= a_thr || delta >= b_thr) return 0.0;
  return -clamp_ramp_slope(std::log(b_thr / delta) / log_ratio, blend) / (delta * log_ratio);
}

HopfCutoff make_hopf_cutoff(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::BadEpsilon, "cut-off parameter must lie in (0, 1]", eps);
  HopfCutoff c;
  c.eps = eps;
  c.a_thr = 0.5 * std::exp(-2.0 / eps);
  c.b_thr = std::exp(-1.0 / eps) + c.a_thr;
  c.log_ratio = 1.0 / eps + std::log(2.0 + std::exp(-1.0 / eps));
  c.blend = std::min(0.05, 0.5 * (1.0 - 1.0 / (eps * c.log_ratio)));
  return c;
}

double hopf_psi(double eps, double delta) { return make_hopf_cutoff(eps)(delta); }

HopfChecks hopf_property_check(double eps, int points) {
  const HopfCutoff c = make_hopf_cutoff(eps);
  HopfChecks out;
  out.eps = eps;
  out.points = points;
  const double step = 2.0 * c.b_thr / points;
  double prev = c(0.0);
  for (int k = 1; k <= points; ++k) {
    const double d = k * step, v = c(d);
    if (std::abs(v) > 1.0) out.bounded = false;
    if (d <= c.a_thr && v != 1.0) out.one_near = false;
    if (d > c.a_thr && d < c.b_thr && (v < 0.0 || v > 1.0)) out.in_unit = false;
    if (d >= c.b_thr && v != 0.0) out.zero_far = false;
    if (v > prev) out.monotone = false;
    if (k > 1) {
      const double ratio = std::abs(v - prev) / step * (d - step) / eps;
      out.max_slope_ratio = std::max(out.max_slope_ratio, ratio);
      if (ratio > 1.0) out.slope = false;
    }
    prev = v;
  }
  return out;
}

double OutletCarrier::stream(double y) const {
  const double psi = StreamProfile(stream_profile(cp))(y);
  if (!hopf) return psi;
  return cut(std::min(y, cp.h - y)) * psi;
}

double OutletCarrier::velocity(double y) const {
  const StreamProfile sp = stream_profile(cp);
  if (!hopf) return sp.derivative(y);
  const bool lower = y < 0.5 * cp.h;
  const double d = lower ? y : cp.h - y;
  return cut.derivative(d) * (lower ? 1.0 : -1.0) * sp(y) + cut(d) * sp.derivative(y);
}

OutletCarrier outlet_carrier(const CouettePoiseuille& cp, double eps) { return {cp, make_hopf_cutoff(eps), true}; }

std::vector<double> outlet_carrier_column(const OutletCarrier& oc, double delta) {
  const int n = static_cast<int>(std::lround(oc.cp.h / delta));
  std::vector<double> out(n);
  for (int m = 0; m < n; ++m) out[m] = (oc.stream((m + 1) * delta) - oc.stream(m * delta)) / delta;
  return out;
}

std::vector<CouettePoiseuille> outlet_flows(const ValidatedDomain& domain) {
  std::vector<CouettePoiseuille> out;
  for (const OutletSpec& o : domain.outlets()) out.push_back(cp_from_data(o.width, o.slip0, o.slip1, o.flux));
  return out;
}

std::shared_ptr<Discretization> make_discretization(const TruncatedDomain& trunc,
                                                    std::shared_ptr<const MacGrid> grid) {
  auto disc = std::make_shared<Discretization>(grid, wall_data(trunc));
  for (int c : grid->fluid_cells()) {
    const Vec2 p = grid->cell_center(c);
    if (trunc.domain.locate(p).outlet < 0 && trunc.domain.in_core(p)) {
      disc->set_pinned_cell(c);
      break;
    }
  }
  return disc;
}

std::vector<double> wall_face_data(const TruncatedDomain& trunc, const MacGrid& grid) {
  std::vector<double> out(grid.num_faces(), 0.0);
  for (int gid : grid.boundary_faces()) {
    if (grid.boundary_tag(gid) == BoundaryTag::Cap) continue;
    const int comp = grid.component(gid);
    const Vec2 a = trunc.domain.wall_velocity(grid.face_center(gid), comp == 1);
    out[gid] = comp == 0 ? a.x : a.y;
  }
  return out;
}

CornerStokes solve_corner_stokes(const ValidatedDomain& domain, double delta) {
  CornerStokes cs{truncate(domain, 2.0), nullptr, nullptr, {}, {}};
  cs.grid = std::make_shared<const MacGrid>(build_grid(cs.trunc, delta));
  cs.disc = make_discretization(cs.trunc, cs.grid);
  const MacGrid& g = *cs.grid;
  std::vector<double> bnd = wall_face_data(cs.trunc, g);
  const std::vector<CouettePoiseuille> cps = outlet_flows(domain);
  std::vector<DiscreteCP> dcps;
  for (const CouettePoiseuille& cp : cps) dcps.push_back(discrete_cp(cp, delta));
  for (int gid : g.boundary_faces()) {
    if (g.boundary_tag(gid) != BoundaryTag::Cap) continue;
    const int j = g.boundary_outlet(gid);
    const OutletSpec& o = domain.outlets()[j];
    const Vec2 l = o.to_local(g.face_center(gid));
    const Vec2 e1 = o.e1();
    bnd[gid] = dcps[j].u_at(l.y) * (g.component(gid) == 0 ? e1.x : e1.y);
  }
  cs.field = solve_stokes(*cs.disc, bnd, nullptr, &cs.residual);
  return cs;
}

CarrierField assemble_carrier(const CornerStokes& corner, double t, double eps, CarrierMode mode) {
  const ValidatedDomain& domain = corner.trunc.domain;
  const MacGrid& g2 = *corner.grid;
  const double d = g2.delta();
  CarrierField cf;
  cf.trunc = truncate(domain, t);
  cf.grid = std::make_shared<const MacGrid>(build_grid(cf.trunc, d));
  cf.disc = make_discretization(cf.trunc, cf.grid);
  cf.epsilon = eps;
  cf.mode = mode;
  cf.cps = outlet_flows(domain);
  cf.report.epsilon = eps;
  cf.report.mode = mode;
  const MacGrid& g = *cf.grid;
  cf.vel.assign(g.num_faces(), 0.0);

  for (int gid = 0; gid < g.num_faces(); ++gid) {
    if (g.face_type(gid) == FaceType::Inactive) continue;
    const Vec2 p = g.face_center(gid);
    if (domain.locate(p).outlet >= 0) continue;
    const int src = g2.find_face(p, g.component(gid));
    if (src < 0) throw Error(ErrorCode::GridMismatch, "core face missing from the corner grid");
    cf.vel[gid] = corner.field.vel[src];
  }

  const int k2 = static_cast<int>(std::lround(2.0 / d));
  const int kt = static_cast<int>(std::lround(t / d));
  for (int j = 0; j < domain.num_outlets(); ++j) {
    const OutletSpec& o = domain.outlets()[j];
    const CouettePoiseuille& cp = cf.cps[j];
    const int n = static_cast<int>(std::lround(o.width / d));
    const int c1 = o.horizontal() ? 0 : 1, c2 = 1 - c1;
    const Vec2 e1 = o.e1(), e2 = o.e2();
    const double e1c = c1 == 0 ? e1.x : e1.y, e2c = c2 == 0 ? e2.x : e2.y;

    std::vector<double> outer(n + 1);
    if (mode == CarrierMode::Hopf) {
      const OutletCarrier oc = outlet_carrier(cp, eps);
      for (int m = 0; m <= n; ++m) outer[m] = oc.stream(m * d);
    } else {
      outer = discrete_cp(cp, d).stream;
    }

    std::vector<std::vector<double>> phi(k2 + 1, std::vector<double>(n + 1, 0.0));
    double c1max = 0.0;
    for (int k = 0; k <= k2; ++k) {
      for (int m = 0; m < n; ++m) {
        const int src = g2.find_face(o.to_global(k * d, (m + 0.5) * d), c1);
        phi[k][m + 1] = phi[k][m] + d * corner.field.vel[src] * e1c;
      }
      c1max = std::max(c1max, std::abs(phi[k][n] - cp.F));
    }
    cf.report.c1.push_back(c1max);
    if (c1max > 1e-10 * std::max(1.0, std::abs(cp.F)))
      throw Error(ErrorCode::StreamMismatch, "outlet " + std::to_string(j) + " stream does not close", c1max);

    auto S = [&](int k, int m) {
      const double z = k <= k2 ? smoothstep_cut(k * d) : 0.0;
      if (z == 0.0) return outer[m];
      return z * phi[k][m] + (1.0 - z) * outer[m];
    };
    for (int k = 1; k <= kt; ++k)
      for (int m = 0; m < n; ++m) {
        const int gid = g.find_face(o.to_global(k * d, (m + 0.5) * d), c1);
        cf.vel[gid] = (S(k, m + 1) - S(k, m)) / d * e1c;
      }
    for (int k = 0; k < kt; ++k)
      for (int m = 0; m <= n; ++m) {
        const int gid = g.find_face(o.to_global((k + 0.5) * d, m * d), c2);
        cf.vel[gid] = -(S(k + 1, m) - S(k, m)) / d * e2c;
      }
  }
  certify_discrete(cf);
  return cf;
}

void certify_discrete(CarrierField& cf) {
  const MacGrid& g = *cf.grid;
  CertificationReport& r = cf.report;
  r.divergence_max = max_abs(cf.disc->divergence(cf.vel));
  const std::vector<double> data = wall_face_data(cf.trunc, g);
  r.trace_error = 0.0;
  for (int gid : g.boundary_faces())
    if (g.boundary_tag(gid) != BoundaryTag::Cap) r.trace_error = std::max(r.trace_error, std::abs(cf.vel[gid] - data[gid]));
  r.flux_error.clear();
  r.flux_drift.clear();
  const int kt = static_cast<int>(std::lround(cf.trunc.t / g.delta()));
  for (int j = 0; j < cf.trunc.domain.num_outlets(); ++j) {
    const double f0 = cross_section(cf.trunc, g, j, 0.0).flux(cf.vel);
    double drift = 0.0;
    for (int k = 1; k <= kt; ++k)
      drift = std::max(drift, std::abs(cross_section(cf.trunc, g, j, k * g.delta()).flux(cf.vel) - f0));
    r.flux_error.push_back(std::abs(f0 - cf.cps[j].F));
    r.flux_drift.push_back(drift);
  }
}

namespace {

struct YNode {
  double y{0.0};
  double w{0.0};
  double dist{0.0};
  double V{0.0};
  std::array<double, 3> G{};                     // G, G', G'' in y
  std::array<std::array<double, 3>, 3> Bm{};     // B_m, B_m', B_m'' in y
};

void add_uniform(std::vector<std::pair<double, double>>& out, double lo, double hi, int n) {
  if (!(hi > lo)) return;
  const double w = (hi - lo) / n;
  for (int i = 0; i < n; ++i) out.emplace_back(lo + (i + 0.5) * w, w);
}

void add_geometric(std::vector<std::pair<double, double>>& out, double lo, double hi, int n) {
  if (!(hi > lo) || !(lo > 0.0)) return;
  const double r = std::log(hi / lo) / n;
  for (int i = 0; i < n; ++i) {
    const double a = lo * std::exp(i * r), b = lo * std::exp((i + 1) * r);
    out.emplace_back(0.5 * (a + b), b - a);
  }
}

std::vector<YNode> y_nodes(const OutletCarrier& oc) {
  const double h = oc.cp.h;
  std::vector<std::pair<double, double>> half;
  const double a = oc.hopf ? oc.cut.a_thr : 0.0, b = oc.hopf ? oc.cut.b_thr : 0.0;
  if (!oc.hopf || b >= 0.5 * h) {
    add_uniform(half, 0.0, 0.5 * h, 400);
  } else {
    add_uniform(half, 0.0, a, 16);
    add_geometric(half, a, b, 256);
    add_uniform(half, b, 0.5 * h, 256);
  }
  std::vector<YNode> nodes;
  nodes.reserve(2 * half.size());
  for (int side = 0; side < 2; ++side)
    for (const auto& [d, w] : half) {
      YNode nd;
      nd.y = side == 0 ? d : h - d;
      nd.w = w;
      nd.dist = d;
      nodes.push_back(nd);
    }
  for (YNode& nd : nodes) {
    const double s = nd.y / h, ih = 1.0 / h, ih2 = ih * ih;
    nd.V = oc.velocity(nd.y);
    nd.G = {3 * s * s - 2 * s * s * s, (6 * s - 6 * s * s) * ih, (6 - 12 * s) * ih2};
    const double q = s - s * s, P = q * q, P1 = 2 * q * (1 - 2 * s), P2 = 2 * (1 - 2 * s) * (1 - 2 * s) - 4 * q;
    const double c = s - 0.5;
    for (int m = 0; m < 3; ++m) {
      const double Q = std::pow(c, m), Q1 = m >= 1 ? m * std::pow(c, m - 1) : 0.0,
                   Q2 = m >= 2 ? m * (m - 1) * std::pow(c, m - 2) : 0.0;
      nd.Bm[m] = {P * Q, (P1 * Q + P * Q1) * ih, (P2 * Q + 2 * P1 * Q1 + P * Q2) * ih2};
    }
  }
  return nodes;
}

struct Sample {
  double c0{0.0};
  std::array<std::array<double, 5>, 3> alpha{};
  std::array<std::array<double, 5>, 3> beta{};
};

struct Ratios {
  double ratio{0.0};
  double hardy{0.0};
};

Ratios evaluate_sample(const Sample& smp, double scale, const std::vector<YNode>& ys, double a, double b) {
  const int nx = 96;
  const double wx = (b - a) / nx;
  double t1 = 0.0, t2 = 0.0, dir = 0.0, hardy = 0.0;
  for (int ix = 0; ix < nx; ++ix) {
    const double x = a + (ix + 0.5) * wx;
    std::array<double, 3> am{}, am1{}, am2{};
    for (int m = 0; m < 3; ++m)
      for (int l = 0; l < 5; ++l) {
        const double om = l * M_PI / (b - a), cs = std::cos(om * (x - a)), sn = std::sin(om * (x - a));
        const double al = scale * smp.alpha[m][l], be = scale * smp.beta[m][l];
        am[m] += al * cs + be * sn;
        am1[m] += om * (-al * sn + be * cs);
        am2[m] += -om * om * (al * cs + be * sn);
      }
    const double c0 = scale * smp.c0;
    for (const YNode& nd : ys) {
      double cx = 0.0, cxx = 0.0, cy = c0 * nd.G[1], cyy = c0 * nd.G[2], cxy = 0.0;
      for (int m = 0; m < 3; ++m) {
        cx += nd.Bm[m][0] * am1[m];
        cxx += nd.Bm[m][0] * am2[m];
        cy += nd.Bm[m][1] * am[m];
        cyy += nd.Bm[m][2] * am[m];
        cxy += nd.Bm[m][1] * am1[m];
      }
      const double w = wx * nd.w;
      t1 += w * nd.V * (cyy * cx + cy * cxy);
      t2 += w * nd.V * (cy * cxy - cx * cyy);
      dir += w * (2.0 * cxy * cxy + cyy * cyy + cxx * cxx);
      hardy += w * (cx * cx + cy * cy) / (nd.dist * nd.dist);
    }
  }
  Ratios r;
  if (dir > 0.0) {
    r.ratio = (std::abs(t1) + std::abs(t2)) / dir;
    r.hardy = std::sqrt(hardy / dir);
  }
  return r;
}

}  // namespace

LerayHopfReport leray_hopf_certify(const OutletCarrier& oc, int outlet, double a, double b, int samples,
                                   std::uint64_t seed) {
  if (a < 2.0 - 1e-12 || !(b > a)) throw Error(ErrorCode::OutOfRange, "certification window must satisfy 2 <= a < b");
  const std::vector<YNode> ys = y_nodes(oc);
  LerayHopfReport rep;
  rep.outlet = outlet;
  rep.a = a;
  rep.b = b;
  rep.samples = samples;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(s));
    std::normal_distribution<double> nd(0.0, 1.0);
    Sample smp;
    smp.c0 = nd(rng);
    for (int m = 0; m < 3; ++m)
      for (int l = 0; l < 5; ++l) {
        smp.alpha[m][l] = nd(rng) / (1.0 + l);
        smp.beta[m][l] = l == 0 ? 0.0 : nd(rng) / (1.0 + l);
      }
    const Ratios r1 = evaluate_sample(smp, 1.0, ys, a, b);
    const Ratios r3 = evaluate_sample(smp, 3.0, ys, a, b);
    rep.max_ratio = std::max(rep.max_ratio, r1.ratio);
    rep.max_hardy = std::max(rep.max_hardy, r1.hardy);
    rep.scale_error = std::max(rep.scale_error, std::abs(r1.ratio - r3.ratio));
    sum += r1.ratio;
  }
  rep.mean_ratio = samples > 0 ? sum / samples : 0.0;
  return rep;
}

LerayHopfReport leray_hopf_certify(const CarrierField& carrier, int outlet, double a, double b, int samples,
                                   std::uint64_t seed) {
  if (outlet < 0 || outlet >= static_cast<int>(carrier.cps.size()))
    throw Error(ErrorCode::OutOfRange, "outlet index out of range", outlet);
  OutletCarrier oc{carrier.cps[outlet], {}, carrier.mode == CarrierMode::Hopf};
  if (oc.hopf) oc.cut = make_hopf_cutoff(carrier.epsilon);
  return leray_hopf_certify(oc, outlet, a, b, samples, seed);
}

EpsilonCalibration calibrate_epsilon(const std::vector<CouettePoiseuille>& cps, double a, double b, int samples,
                                     std::uint64_t seed, double target, double margin, double start,
                                     int max_halvings) {
  EpsilonCalibration cal;
  double eps = start;
  for (int it = 0; it <= max_halvings; ++it, eps *= 0.5) {
    cal.tried.push_back(eps);
    cal.reports.clear();
    bool ok = true;
    for (std::size_t j = 0; j < cps.size(); ++j) {
      cal.reports.push_back(leray_hopf_certify(outlet_carrier(cps[j], eps), static_cast<int>(j), a, b, samples, seed));
      ok = ok && cal.reports.back().max_ratio <= target / margin;
    }
    cal.epsilon = eps;
    if (ok) {
      cal.passed = true;
      break;
    }
  }
  return cal;
}

}  // namespace cpflow
