#include "cpflow/field_io.hpp"

#include <functional>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cpflow/error.hpp"

namespace cpflow {

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void block(std::ostream& os, const char* tag, int cols, int rows, const std::function<double(int, int)>& at) {
  os << '[' << tag << "]\n";
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) os << (i ? " " : "") << fmt(at(i, j));
    os << '\n';
  }
}

void read_block(std::istream& is, const char* tag, int count, std::vector<double>& out) {
  std::string line;
  while (std::getline(is, line) && line.empty()) {
  }
  if (line != std::string("[") + tag + "]")
    throw Error(ErrorCode::ParseError, std::string("expected section [") + tag + "]");
  out.resize(count);
  for (int k = 0; k < count; ++k) {
    std::string tok;
    if (!(is >> tok)) throw Error(ErrorCode::ParseError, std::string("truncated section [") + tag + "]");
    if (tok == "nan") {
      out[k] = std::nan("");
      continue;
    }
    std::size_t used = 0;
    try {
      out[k] = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorCode::ParseError, "bad value '" + tok + "'");
  }
  std::getline(is, line);
}

}  // namespace

void write_field(std::ostream& os, const MacGrid& g, const std::vector<double>& vel, const std::vector<double>& p) {
  const double nan = std::nan("");
  os << "cpflow-field nx=" << g.nx() << " ny=" << g.ny() << " delta=" << fmt(g.delta()) << " x0=" << fmt(g.origin().x)
     << " y0=" << fmt(g.origin().y) << " layout=mac\n";
  block(os, "u", g.nx() + 1, g.ny(), [&](int i, int j) {
    const int gid = g.u_gid(i, j);
    return g.face_type(gid) == FaceType::Inactive ? nan : vel[gid];
  });
  block(os, "v", g.nx(), g.ny() + 1, [&](int i, int j) {
    const int gid = g.v_gid(i, j);
    return g.face_type(gid) == FaceType::Inactive ? nan : vel[gid];
  });
  block(os, "p", g.nx(), g.ny(), [&](int i, int j) {
    const int c = j * g.nx() + i;
    return g.cell(i, j) == CellType::Fluid ? p[c] : nan;
  });
}

void write_field_file(const std::string& path, const MacGrid& grid, const std::vector<double>& vel,
                      const std::vector<double>& p) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidSpec, "cannot write " + path);
  write_field(os, grid, vel, p);
}

FieldDump read_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error(ErrorCode::ParseError, "empty field dump");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "cpflow-field") throw Error(ErrorCode::ParseError, "not a cpflow field dump");
  FieldDump d;
  bool have[5] = {false, false, false, false, false};
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "bad header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "nx") d.nx = std::stoi(val), have[0] = true;
      else if (key == "ny") d.ny = std::stoi(val), have[1] = true;
      else if (key == "delta") d.delta = std::stod(val), have[2] = true;
      else if (key == "x0") d.x0 = std::stod(val), have[3] = true;
      else if (key == "y0") d.y0 = std::stod(val), have[4] = true;
      else if (key == "layout" && val != "mac") throw Error(ErrorCode::ParseError, "unsupported layout " + val);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::ParseError, "bad header value for " + key);
    }
  }
  for (bool h : have)
    if (!h) throw Error(ErrorCode::ParseError, "incomplete field header");
  if (d.nx < 1 || d.ny < 1) throw Error(ErrorCode::ParseError, "grid dimensions must be positive");
  read_block(is, "u", (d.nx + 1) * d.ny, d.u);
  read_block(is, "v", d.nx * (d.ny + 1), d.v);
  read_block(is, "p", d.nx * d.ny, d.p);
  return d;
}

}  // namespace cpflow
