#include "cpflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cpflow {

namespace {

using json = nlohmann::json;

#ifndef CPFLOW_VERSION
#define CPFLOW_VERSION "0.0.0"
#endif

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out;
  for (const ConfigIssue& i : issues) {
    if (!out.empty()) out += "; ";
    if (i.line > 0) out += "line " + std::to_string(i.line) + ": ";
    out += i.key.empty() ? i.reason : i.key + ": " + i.reason;
  }
  return out;
}

int line_of_offset(const std::string& text, std::size_t off) {
  off = std::min(off, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(off), '\n'));
}

/// Walks the JSON tree, collecting type errors with key paths.
class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  std::vector<ConfigIssue> issues;

  void fail(const std::string& key, const std::string& reason) { issues.push_back({key, reason, line_of(key)}); }

  /// Flags keys of `obj` outside `allowed`.
  void only(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) fail(sub(path, k), "unknown key");
  }

  const json* object(const json& obj, const std::string& path, const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(sub(path, key), "missing");
      return nullptr;
    }
    const json& v = obj.at(key);
    if (!v.is_object()) {
      fail(sub(path, key), "expected an object");
      return nullptr;
    }
    return &v;
  }

  const json* array(const json& obj, const std::string& path, const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(sub(path, key), "missing");
      return nullptr;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      fail(sub(path, key), "expected an array");
      return nullptr;
    }
    return &v;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(sub(path, key), "missing");
      return;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) return fail(sub(path, key), "expected a number");
    out = v.get<double>();
  }

  void integer(const json& obj, const std::string& path, const char* key, int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) return fail(sub(path, key), "expected an integer");
    out = v.get<int>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) return fail(sub(path, key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(sub(path, key), "missing");
      return;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) return fail(sub(path, key), "expected a string");
    out = v.get<std::string>();
  }

  /// Fixed-length numeric array.
  bool numbers(const json& v, const std::string& path, std::size_t n, double* out) {
    if (!v.is_array() || v.size() != n) {
      fail(path, "expected an array of " + std::to_string(n) + " numbers");
      return false;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!v[k].is_number()) {
        fail(path + "[" + std::to_string(k) + "]", "expected a number");
        return false;
      }
      out[k] = v[k].get<double>();
    }
    return true;
  }

  static std::string sub(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  int line_of(const std::string& path) const {
    std::string key = path;
    const auto dot = key.find_last_of('.');
    if (dot != std::string::npos) key = key.substr(dot + 1);
    const auto br = key.find('[');
    if (br != std::string::npos) key = key.substr(0, br);
    const auto pos = text_.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text_, pos);
  }

  const std::string& text_;
};

Box read_box(Reader& r, const json& v, const std::string& path) {
  double b[4] = {0, 0, 0, 0};
  r.numbers(v, path, 4, b);
  return {b[0], b[1], b[2], b[3]};
}

Vec2 read_vec(Reader& r, const json& v, const std::string& path) {
  double b[2] = {0, 0};
  r.numbers(v, path, 2, b);
  return {b[0], b[1]};
}

const char* kSideNames[4] = {"left", "right", "bottom", "top"};

DomainSpec read_domain(Reader& r, const json& d) {
  const std::string path = "domain";
  r.only(d, path, {"core", "outlets", "obstacles", "walls"});
  DomainSpec spec;
  if (const json* core = r.array(d, path, "core", true))
    for (std::size_t k = 0; k < core->size(); ++k)
      spec.core.push_back(read_box(r, (*core)[k], path + ".core[" + std::to_string(k) + "]"));
  if (const json* outs = r.array(d, path, "outlets", true))
    for (std::size_t k = 0; k < outs->size(); ++k) {
      const std::string p = path + ".outlets[" + std::to_string(k) + "]";
      const json& o = (*outs)[k];
      if (!o.is_object()) {
        r.fail(p, "expected an object");
        continue;
      }
      r.only(o, p, {"direction", "attach", "width", "flux", "slip"});
      OutletSpec out;
      std::string dir;
      r.string(o, p, "direction", dir, true);
      if (!dir.empty()) {
        if (const auto pd = parse_direction(dir)) out.direction = *pd;
        else r.fail(p + ".direction", "expected one of +x, -x, +y, -y");
      }
      if (o.contains("attach")) out.attach = read_vec(r, o.at("attach"), p + ".attach");
      else r.fail(p + ".attach", "missing");
      r.number(o, p, "width", out.width, false);
      r.number(o, p, "flux", out.flux, true);
      if (o.contains("slip")) {
        double s[2] = {0, 0};
        if (r.numbers(o.at("slip"), p + ".slip", 2, s)) {
          out.slip0 = s[0];
          out.slip1 = s[1];
        }
      }
      spec.outlets.push_back(out);
    }
  if (const json* obs = r.array(d, path, "obstacles", false))
    for (std::size_t k = 0; k < obs->size(); ++k) {
      const std::string p = path + ".obstacles[" + std::to_string(k) + "]";
      const json& o = (*obs)[k];
      if (!o.is_object()) {
        r.fail(p, "expected an object");
        continue;
      }
      r.only(o, p, {"box", "sides"});
      ObstacleSpec ob;
      if (o.contains("box")) ob.box = read_box(r, o.at("box"), p + ".box");
      else r.fail(p + ".box", "missing");
      if (const json* sides = r.object(o, p, "sides", false)) {
        r.only(*sides, p + ".sides", {"left", "right", "bottom", "top"});
        for (int s = 0; s < 4; ++s)
          if (const json* sd = r.object(*sides, p + ".sides", kSideNames[s], false)) {
            const std::string sp = p + ".sides." + kSideNames[s];
            r.only(*sd, sp, {"normal", "tangential"});
            r.number(*sd, sp, "normal", ob.sides[s].normal);
            r.number(*sd, sp, "tangential", ob.sides[s].tangential);
          }
      }
      spec.obstacles.push_back(ob);
    }
  if (const json* walls = r.array(d, path, "walls", false))
    for (std::size_t k = 0; k < walls->size(); ++k) {
      const std::string p = path + ".walls[" + std::to_string(k) + "]";
      const json& o = (*walls)[k];
      if (!o.is_object()) {
        r.fail(p, "expected an object");
        continue;
      }
      r.only(o, p, {"a", "b", "velocity"});
      WallSegment w;
      if (o.contains("a")) w.a = read_vec(r, o.at("a"), p + ".a");
      else r.fail(p + ".a", "missing");
      if (o.contains("b")) w.b = read_vec(r, o.at("b"), p + ".b");
      else r.fail(p + ".b", "missing");
      if (o.contains("velocity")) w.velocity = read_vec(r, o.at("velocity"), p + ".velocity");
      spec.core_walls.push_back(w);
    }
  return spec;
}

json write_domain(const DomainSpec& d) {
  json out = json::object();
  out["core"] = json::array();
  for (const Box& b : d.core) out["core"].push_back({b.x0, b.y0, b.x1, b.y1});
  out["outlets"] = json::array();
  for (const OutletSpec& o : d.outlets)
    out["outlets"].push_back({{"direction", to_string(o.direction)},
                              {"attach", {o.attach.x, o.attach.y}},
                              {"width", o.width},
                              {"flux", o.flux},
                              {"slip", {o.slip0, o.slip1}}});
  out["obstacles"] = json::array();
  for (const ObstacleSpec& ob : d.obstacles) {
    json sides = json::object();
    for (int s = 0; s < 4; ++s)
      sides[kSideNames[s]] = {{"normal", ob.sides[s].normal}, {"tangential", ob.sides[s].tangential}};
    out["obstacles"].push_back({{"box", {ob.box.x0, ob.box.y0, ob.box.x1, ob.box.y1}}, {"sides", sides}});
  }
  out["walls"] = json::array();
  for (const WallSegment& w : d.core_walls)
    out["walls"].push_back(
        {{"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}, {"velocity", {w.velocity.x, w.velocity.y}}});
  return out;
}

json to_json(const RunSpec& s) {
  json carrier = {{"mode", to_string(s.carrier.mode)},
                  {"epsilon", s.carrier.epsilon},
                  {"calibrate", s.carrier.calibrate},
                  {"samples", s.carrier.samples},
                  {"window", {s.carrier.window_a, s.carrier.window_b}},
                  {"target", s.carrier.target},
                  {"margin", s.carrier.margin}};
  if (s.carrier.seed) carrier["seed"] = *s.carrier.seed;
  const SolverOptions& so = s.solver;
  const DiagnosticsConfig& dg = s.diagnostics;
  return {{"name", s.name},
          {"domain", write_domain(s.domain)},
          {"delta", s.delta},
          {"carrier", carrier},
          {"solver",
           {{"tolerance", so.tolerance},
            {"picard_switch", so.picard_switch},
            {"max_picard", so.max_picard},
            {"max_newton", so.max_newton},
            {"continuation_steps", so.continuation_steps},
            {"max_continuation_steps", so.max_continuation_steps}}},
          {"schedule", s.schedule.to_string()},
          {"truncation", s.truncation},
          {"diagnostics",
           {{"energy", dg.energy},
            {"asymptotics", dg.asymptotics},
            {"uniqueness", dg.uniqueness},
            {"energy_tolerance", dg.energy_tolerance},
            {"final_threshold", dg.final_threshold},
            {"uniqueness_tolerance", dg.uniqueness_tolerance},
            {"small_data_threshold", dg.small_data_threshold},
            {"init_norm", dg.init_norm},
            {"sweep", dg.sweep}}},
          {"output", s.output}};
}

}  // namespace

ConfigError::ConfigError(ErrorCode code, std::vector<ConfigIssue> issues, double value)
    : Error(code, join_issues(issues), value), issues_(std::move(issues)) {}

RunSpec parse_config_text(const std::string& text, const std::string& origin, bool check) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ErrorCode::ParseError,
                      {{origin, "malformed JSON: " + std::string(e.what()), line_of_offset(text, e.byte)}});
  }
  Reader r(text);
  RunSpec spec;
  if (!root.is_object()) throw ConfigError(ErrorCode::ParseError, {{origin, "top level must be an object", 1}});
  r.only(root, "",
         {"name", "domain", "delta", "carrier", "solver", "schedule", "truncation", "diagnostics", "output"});
  r.string(root, "", "name", spec.name);
  if (const json* d = r.object(root, "", "domain", true)) spec.domain = read_domain(r, *d);
  r.number(root, "", "delta", spec.delta, true);
  if (const json* c = r.object(root, "", "carrier", false)) {
    const std::string p = "carrier";
    r.only(*c, p, {"mode", "epsilon", "calibrate", "samples", "seed", "window", "target", "margin"});
    std::string mode;
    r.string(*c, p, "mode", mode);
    if (!mode.empty()) {
      try {
        spec.carrier.mode = parse_carrier_mode(mode);
      } catch (const Error&) {
        r.fail(p + ".mode", "expected hopf or cp");
      }
    }
    r.number(*c, p, "epsilon", spec.carrier.epsilon);
    r.boolean(*c, p, "calibrate", spec.carrier.calibrate);
    r.integer(*c, p, "samples", spec.carrier.samples);
    if (c->contains("seed")) {
      const json& s = c->at("seed");
      if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
        spec.carrier.seed = s.get<std::uint64_t>();
      else
        r.fail(p + ".seed", "expected a nonnegative integer");
    }
    if (c->contains("window")) {
      double w[2];
      if (r.numbers(c->at("window"), p + ".window", 2, w)) {
        spec.carrier.window_a = w[0];
        spec.carrier.window_b = w[1];
      }
    }
    r.number(*c, p, "target", spec.carrier.target);
    r.number(*c, p, "margin", spec.carrier.margin);
  }
  if (const json* s = r.object(root, "", "solver", false)) {
    const std::string p = "solver";
    r.only(*s, p,
           {"tolerance", "picard_switch", "max_picard", "max_newton", "continuation_steps", "max_continuation_steps"});
    r.number(*s, p, "tolerance", spec.solver.tolerance);
    r.number(*s, p, "picard_switch", spec.solver.picard_switch);
    r.integer(*s, p, "max_picard", spec.solver.max_picard);
    r.integer(*s, p, "max_newton", spec.solver.max_newton);
    r.integer(*s, p, "continuation_steps", spec.solver.continuation_steps);
    r.integer(*s, p, "max_continuation_steps", spec.solver.max_continuation_steps);
  }
  std::string sched;
  r.string(root, "", "schedule", sched);
  if (!sched.empty()) {
    try {
      spec.schedule = Schedule::parse(sched);
    } catch (const Error& e) {
      r.fail("schedule", e.what());
    }
  }
  r.number(root, "", "truncation", spec.truncation);
  if (const json* d = r.object(root, "", "diagnostics", false)) {
    const std::string p = "diagnostics";
    DiagnosticsConfig& dg = spec.diagnostics;
    r.only(*d, p,
           {"energy", "asymptotics", "uniqueness", "energy_tolerance", "final_threshold", "uniqueness_tolerance",
            "small_data_threshold", "init_norm", "sweep"});
    r.boolean(*d, p, "energy", dg.energy);
    r.boolean(*d, p, "asymptotics", dg.asymptotics);
    r.boolean(*d, p, "uniqueness", dg.uniqueness);
    r.number(*d, p, "energy_tolerance", dg.energy_tolerance);
    r.number(*d, p, "final_threshold", dg.final_threshold);
    r.number(*d, p, "uniqueness_tolerance", dg.uniqueness_tolerance);
    r.number(*d, p, "small_data_threshold", dg.small_data_threshold);
    r.number(*d, p, "init_norm", dg.init_norm);
    if (const json* sw = r.array(*d, p, "sweep", false))
      for (std::size_t k = 0; k < sw->size(); ++k) {
        if ((*sw)[k].is_number()) dg.sweep.push_back((*sw)[k].get<double>());
        else r.fail(p + ".sweep[" + std::to_string(k) + "]", "expected a number");
      }
  }
  r.string(root, "", "output", spec.output);
  if (!r.issues.empty()) throw ConfigError(ErrorCode::ParseError, r.issues);
  if (check) validate(spec);
  return spec;
}

RunSpec parse_config(const std::string& path, bool check) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ErrorCode::ParseError, {{path, "cannot open file", 0}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, check);
}

std::vector<ConfigIssue> validation_issues(const RunSpec& s) {
  std::vector<ConfigIssue> out;
  auto bad = [&](const std::string& key, const std::string& reason) { out.push_back({key, reason, 0}); };
  auto positive = [&](double v, const std::string& key) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(key, "must be positive");
  };
  positive(s.delta, "delta");
  const bool grid_ok = s.delta > 0.0 && std::isfinite(s.delta);
  auto multiple = [&](double v, const std::string& key) {
    if (grid_ok && !commensurate(v, s.delta)) bad(key, "not a multiple of delta");
  };
  for (std::size_t k = 0; k < s.domain.core.size(); ++k) {
    const Box& b = s.domain.core[k];
    for (double v : {b.x0, b.y0, b.x1, b.y1}) multiple(v, "domain.core[" + std::to_string(k) + "]");
  }
  for (std::size_t k = 0; k < s.domain.outlets.size(); ++k) {
    const OutletSpec& o = s.domain.outlets[k];
    const std::string p = "domain.outlets[" + std::to_string(k) + "]";
    multiple(o.attach.x, p + ".attach");
    multiple(o.attach.y, p + ".attach");
    multiple(o.width, p + ".width");
  }
  for (std::size_t k = 0; k < s.domain.obstacles.size(); ++k) {
    const Box& b = s.domain.obstacles[k].box;
    for (double v : {b.x0, b.y0, b.x1, b.y1}) multiple(v, "domain.obstacles[" + std::to_string(k) + "].box");
  }
  for (std::size_t k = 0; k < s.domain.core_walls.size(); ++k) {
    const WallSegment& w = s.domain.core_walls[k];
    for (double v : {w.a.x, w.a.y, w.b.x, w.b.y}) multiple(v, "domain.walls[" + std::to_string(k) + "]");
  }
  try {
    validate_domain(s.domain);
  } catch (const Error& e) {
    bad("domain", std::string(to_string(e.code())) + ": " + e.what());
  }

  const CarrierConfig& c = s.carrier;
  if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) bad("carrier.epsilon", "must lie in (0, 1]");
  if (c.samples < 0) bad("carrier.samples", "must be nonnegative");
  if ((c.calibrate || c.samples > 0) && !c.seed) bad("carrier.seed", "required when sampling is enabled");
  if (c.calibrate && c.samples <= 0) bad("carrier.samples", "calibration needs at least one sample");
  if (c.window_a < 2.0) bad("carrier.window", "window must start at x >= 2");
  if (!(c.window_b > c.window_a)) bad("carrier.window", "window must be nonempty");
  positive(c.target, "carrier.target");
  if (!(c.margin >= 1.0)) bad("carrier.margin", "must be at least 1");

  const SolverOptions& so = s.solver;
  positive(so.tolerance, "solver.tolerance");
  positive(so.picard_switch, "solver.picard_switch");
  if (so.max_picard < 1) bad("solver.max_picard", "must be at least 1");
  if (so.max_newton < 1) bad("solver.max_newton", "must be at least 1");
  if (so.continuation_steps < 1) bad("solver.continuation_steps", "must be at least 1");
  if (so.max_continuation_steps < so.continuation_steps)
    bad("solver.max_continuation_steps", "must be at least continuation_steps");

  for (std::size_t k = 0; k < s.schedule.t.size(); ++k) {
    const std::string key = "schedule[" + std::to_string(k) + "]";
    if (s.schedule.t[k] < 0.0) bad(key, "must be nonnegative");
    if (k > 0 && !(s.schedule.t[k] > s.schedule.t[k - 1])) bad(key, "must increase");
    multiple(s.schedule.t[k], key);
  }
  if (s.truncation < 0.0) bad("truncation", "must be nonnegative");
  multiple(s.truncation, "truncation");

  const DiagnosticsConfig& dg = s.diagnostics;
  positive(dg.energy_tolerance, "diagnostics.energy_tolerance");
  positive(dg.final_threshold, "diagnostics.final_threshold");
  positive(dg.uniqueness_tolerance, "diagnostics.uniqueness_tolerance");
  positive(dg.small_data_threshold, "diagnostics.small_data_threshold");
  positive(dg.init_norm, "diagnostics.init_norm");
  for (double a : dg.sweep)
    if (!(a > 0.0)) bad("diagnostics.sweep", "amplitudes must be positive");
  if (s.output.empty()) bad("output", "must not be empty");
  return out;
}

void validate(const RunSpec& spec) {
  std::vector<ConfigIssue> issues = validation_issues(spec);
  if (issues.empty()) return;
  double value = std::numeric_limits<double>::quiet_NaN();
  try {
    validate_domain(spec.domain);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FluxIncompatible) value = e.value();
  }
  throw ConfigError(ErrorCode::ValidationError, std::move(issues), value);
}

std::string serialize(const RunSpec& spec) { return to_json(spec).dump(2) + "\n"; }

std::string config_hash(const RunSpec& spec) {
  RunSpec key = spec;
  key.output.clear();
  const std::string text = to_json(key).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double data_amplitude(const DomainSpec& spec) {
  double a = 0.0;
  for (const OutletSpec& o : spec.outlets)
    a = std::max({a, std::abs(o.flux), std::abs(o.slip0), std::abs(o.slip1)});
  for (const ObstacleSpec& ob : spec.obstacles)
    for (const SideData& s : ob.sides) a = std::max({a, std::abs(s.normal), std::abs(s.tangential)});
  for (const WallSegment& w : spec.core_walls) a = std::max({a, std::abs(w.velocity.x), std::abs(w.velocity.y)});
  return a;
}

std::string version() { return CPFLOW_VERSION; }

}  // namespace cpflow
