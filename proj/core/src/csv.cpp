#include "hmin/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hmin {

std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (const double v : values) {
    if (!first) os << ',';
    os << format_g17(v);
    first = false;
  }
  os << '\n';
}

void write_grid_csv(std::ostream& os, const GridFunction& f, const std::string& name) {
  const Grid& g = f.grid();
  os << "x1,x2," << name << '\n';
  for (int j = 0; j < g.n2(); ++j) {
    for (int i = 0; i < g.n1(); ++i) write_csv_row(os, {g.x1(i), g.x2(j), f(i, j)});
  }
}

GridFunction read_grid_csv(std::istream& is, const Grid& grid) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("grid csv: empty input");
  GridFunction f(grid);
  const double tol1 = 1e-9 * grid.h1(), tol2 = 1e-9 * grid.h2();
  for (int j = 0; j < grid.n2(); ++j) {
    for (int i = 0; i < grid.n1(); ++i) {
      if (!std::getline(is, line)) throw std::runtime_error("grid csv: too few rows");
      std::istringstream row(line);
      double x1 = 0, x2 = 0, v = 0;
      char c1 = 0, c2 = 0;
      if (!(row >> x1 >> c1 >> x2 >> c2 >> v) || c1 != ',' || c2 != ',') {
        throw std::runtime_error("grid csv: malformed row " + std::to_string(grid.index(i, j) + 2));
      }
      if (std::abs(x1 - grid.x1(i)) > tol1 || std::abs(x2 - grid.x2(j)) > tol2) {
        throw std::runtime_error("grid csv: node coordinates do not match the grid at row " +
                                 std::to_string(grid.index(i, j) + 2));
      }
      f(i, j) = v;
    }
  }
  return f;
}

}  // namespace hmin
