#include "cpflow/invading.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpflow/error.hpp"

namespace cpflow {

Schedule Schedule::linear(double t0, double step, int K) {
  Schedule s;
  for (int k = 0; k <= K; ++k) s.t.push_back(t0 + step * k);
  return s;
}

Schedule Schedule::parse(const std::string& text) {
  std::string c;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) c += ch;
  auto fail = [&](const std::string& why) -> Schedule {
    throw Error(ErrorCode::ParseError, "schedule '" + text + "': " + why);
  };
  Schedule s;
  try {
    const auto kpos = c.find("k,K=");
    if (kpos != std::string::npos) {
      const std::string lin = c.substr(0, kpos);
      const int K = std::stoi(c.substr(kpos + 4));
      const auto plus = lin.find('+', 1);
      if (plus == std::string::npos) return fail("expected a+bk");
      const double a = std::stod(lin.substr(0, plus));
      const std::string bs = lin.substr(plus + 1);
      const double b = bs.empty() ? 1.0 : std::stod(bs);
      if (K < 0) return fail("K must be >= 0");
      s = linear(a, b, K);
    } else {
      std::stringstream ss(c);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        s.t.push_back(std::stod(item, &used));
        if (used != item.size()) return fail("bad number '" + item + "'");
      }
    }
  } catch (const std::logic_error&) {
    return fail("malformed");
  }
  if (s.t.empty()) return fail("empty");
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    if (s.t[k] < 0.0) return fail("negative truncation");
    if (k > 0 && !(s.t[k] > s.t[k - 1])) return fail("not strictly increasing");
  }
  return s;
}

std::string Schedule::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < t.size(); ++k) os << (k ? "," : "") << t[k];
  return os.str();
}

std::string classify_regime(const std::vector<double>& J, double ratio, int run) {
  int streak = 0;
  for (std::size_t k = 0; k + 1 < J.size(); ++k) {
    const bool grows = J[k] > 1e-14 && J[k + 1] / J[k] > ratio;
    streak = grows ? streak + 1 : 0;
    if (streak >= run) return "II";
  }
  return "I";
}

InvadingRun run_invading(const ValidatedDomain& domain, const Schedule& schedule, const InvadingOptions& opts) {
  InvadingRun run;
  run.steps.reserve(schedule.t.size());
  const CornerStokes corner = solve_corner_stokes(domain, opts.delta);
  const InvadingStep* prev = nullptr;
  for (std::size_t k = 0; k < schedule.t.size(); ++k) {
    InvadingStep st;
    st.k = static_cast<int>(k);
    st.t = schedule.t[k];
    try {
      st.carrier = assemble_carrier(corner, st.t, opts.epsilon, opts.mode);
      const MacGrid& g = *st.carrier.grid;
      NSProblem pb{st.carrier.disc, st.carrier.vel, {}};
      if (opts.force) pb.force = sample_force(g, opts.force);
      std::vector<double> w0;
      if (opts.warm_start && prev) {
        const MacGrid& pg = *prev->carrier.grid;
        w0.assign(g.num_faces(), 0.0);
        for (int gid : g.unknown_faces()) {
          const int pgid = pg.find_face(g.face_center(gid), g.component(gid));
          if (pgid >= 0 && pg.face_type(pgid) == FaceType::Interior) w0[gid] = prev->result.u[pgid] - st.carrier.vel[gid];
        }
      }
      st.result = solve_steady_ns(pb, opts.solver, w0.empty() ? nullptr : &w0);
      st.result.mode = to_string(opts.mode);
      st.ok = true;
    } catch (const Error& e) {
      st.ok = false;
      st.error = e.what();
      st.failure = e.code();
    }
    run.steps.push_back(std::move(st));
    if (run.steps.back().ok) prev = &run.steps.back();
  }
  std::vector<double> J;
  for (const InvadingStep& s : run.steps)
    if (s.ok) J.push_back(s.result.J);
  run.regime = classify_regime(J);
  return run;
}

std::vector<double> integer_grid(double t) {
  std::vector<double> g;
  for (int i = 0; i <= static_cast<int>(std::floor(t + 1e-9)); ++i) g.push_back(i);
  return g;
}

GrowthProfile growth_profile(const InvadingStep& step, const std::vector<double>& t_grid) {
  GrowthProfile gp;
  const TruncatedDomain& tr = step.carrier.trunc;
  const Discretization& disc = *step.carrier.disc;
  const std::vector<double>& w = step.result.field.vel;
  for (double t : t_grid) {
    if (t > tr.t + 1e-9) throw Error(ErrorCode::OutOfRange, "profile abscissa beyond the truncation", t);
    gp.t.push_back(t);
    gp.D.push_back(dirichlet_energy(disc, w, 0.0, [&](Vec2 p) { return tr.in_truncation(p, t); }));
  }
  for (std::size_t i = 0; i < gp.D.size(); ++i) {
    gp.e.push_back(i == 0 ? gp.D[0] : gp.D[i] - gp.D[i - 1]);
    gp.h.push_back(i == 0 ? gp.D[0] : 0.5 * (gp.D[i] + gp.D[i - 1]) * (gp.t[i] - gp.t[i - 1]));
    if (i > 0 && gp.D[i] < gp.D[i - 1]) gp.monotone = false;
  }
  const double hi = tr.t - 1.0;
  gp.c0 = fitted_slope(gp, 2.0, hi);
  gp.c1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gp.t.size(); ++i)
    if (gp.t[i] >= 2.0 - 1e-9 && gp.t[i] <= hi + 1e-9) gp.c1 = std::max(gp.c1, gp.D[i] - gp.c0 * gp.t[i]);
  if (!std::isfinite(gp.c1)) gp.c1 = 0.0;
  return gp;
}

double fitted_slope(const GrowthProfile& g, double lo, double hi) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    if (g.t[i] < lo - 1e-9 || g.t[i] > hi + 1e-9) continue;
    n += 1;
    sx += g.t[i];
    sy += g.D[i];
    sxx += g.t[i] * g.t[i];
    sxy += g.t[i] * g.D[i];
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den <= 0.0) return 0.0;
  return (n * sxy - sx * sy) / den;
}

double max_slab_energy(const GrowthProfile& g, double lo, double hi) {
  double m = 0.0;
  for (std::size_t i = 1; i < g.t.size(); ++i)
    if (g.t[i] >= lo - 1e-9 && g.t[i] <= hi + 1e-9) m = std::max(m, g.e[i]);
  return m;
}

NormalizedEntry normalize_field(const Discretization& disc, const std::vector<double>& w, const RegionFn& window) {
  NormalizedEntry e;
  e.J = std::sqrt(dirichlet_energy(disc, w, 0.0));
  if (e.J < 1e-14) throw Error(ErrorCode::DegenerateNormalization, "perturbation has (numerically) zero energy", e.J);
  std::vector<double> wh(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) wh[i] = w[i] / e.J;
  e.J_hat = std::sqrt(dirichlet_energy(disc, wh, 0.0));
  const MacGrid& g = disc.grid();
  double s = 0.0;
  for (int gid : g.unknown_faces())
    if (!window || window(g.face_center(gid))) s += wh[gid] * wh[gid];
  e.window_norm = std::sqrt(s) * g.delta();
  return e;
}

std::vector<NormalizedEntry> normalized_view(const InvadingRun& run, double window_t, bool require_growth) {
  if (require_growth && run.regime != "II")
    throw Error(ErrorCode::OutOfRange, "normalized view needs a growing (Case II) sequence");
  std::vector<NormalizedEntry> out;
  for (const InvadingStep& s : run.steps) {
    if (!s.ok) continue;
    const TruncatedDomain& tr = s.carrier.trunc;
    NormalizedEntry e = normalize_field(*s.carrier.disc, s.result.field.vel,
                                        [&](Vec2 p) { return tr.in_truncation(p, window_t); });
    e.k = s.k;
    out.push_back(e);
  }
  return out;
}

namespace {

std::vector<double> derivative(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return d;
}

}  // namespace

ComparisonResult comparison_check(const std::vector<double>& h, const std::vector<double>& phi,
                                  const std::function<double(double)>& Psi, double t0, double T) {
  if (h.size() < 16 || phi.size() != h.size())
    throw Error(ErrorCode::GridTooCoarse, "comparison needs at least 16 matching samples",
                static_cast<double>(h.size()));
  if (!(T > t0)) throw Error(ErrorCode::OutOfRange, "empty comparison interval");
  const std::size_t n = h.size();
  const double dt = (T - t0) / static_cast<double>(n - 1);
  const std::vector<double> dh = derivative(h, dt), dphi = derivative(phi, dt);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(h[i]), std::abs(phi[i])});
  const double tol = 1e-12 * scale;
  ComparisonResult r;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    if (r.h_bound && h[i] > Psi(std::max(0.0, dh[i])) + 0.5 * phi[i] + tol) {
      r.h_bound = false;
      r.first_h_bound_failure = t;
    }
    if (r.phi_bound && phi[i] + tol < 2.0 * Psi(std::max(0.0, dphi[i]))) {
      r.phi_bound = false;
      r.first_phi_bound_failure = t;
    }
  }
  r.endpoint = h[n - 1] <= phi[n - 1] + tol;
  r.hypotheses_hold = r.h_bound && r.phi_bound && r.endpoint;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) r.max_violation = std::max(r.max_violation, h[i] - phi[i]);
  r.conclusion_holds = r.max_violation <= tol;
  std::ostringstream os;
  if (!r.h_bound) os << "h <= Psi(h') + phi/2 fails at t=" << r.first_h_bound_failure << "; ";
  if (!r.phi_bound) os << "phi >= 2 Psi(phi') fails at t=" << r.first_phi_bound_failure << "; ";
  if (!r.endpoint) os << "h(T) <= phi(T) fails at t=" << T << "; ";
  if (r.hypotheses_hold) os << (r.conclusion_holds ? "hypotheses and conclusion hold" : "conclusion violated");
  r.message = os.str();
  return r;
}

}  // namespace cpflow
