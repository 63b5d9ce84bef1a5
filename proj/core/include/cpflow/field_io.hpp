#pragma once

// Text dump of a staggered field: one header line, then the u, v and p
// arrays row by row (bottom row first). Faces and cells outside the fluid
// hold "nan".

#include <iosfwd>
#include <string>
#include <vector>

#include "cpflow/geometry.hpp"

namespace cpflow {

struct FieldDump {
  int nx{0};
  int ny{0};
  double delta{0.0};
  double x0{0.0};
  double y0{0.0};
  std::vector<double> u;  // (nx + 1) * ny
  std::vector<double> v;  // nx * (ny + 1)
  std::vector<double> p;  // nx * ny
};

/// `vel` holds every face (u block then v block), `p` every cell.
void write_field(std::ostream& os, const MacGrid& grid, const std::vector<double>& vel,
                 const std::vector<double>& p);
void write_field_file(const std::string& path, const MacGrid& grid, const std::vector<double>& vel,
                      const std::vector<double>& p);

/// Throws ParseError on a malformed dump.
FieldDump read_field(std::istream& is);

}  // namespace cpflow
