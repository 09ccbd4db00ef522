#ifndef HMIN_CSV_HPP
#define HMIN_CSV_HPP

#include <initializer_list>
#include <iosfwd>
#include <string>

#include "hmin/grid.hpp"

namespace hmin {

/// printf("%.17g"): round-trips every double.
std::string format_g17(double x);

void write_csv_row(std::ostream& os, std::initializer_list<double> values);

/// Header x1,x2,<name>, one row per node, i fastest.
void write_grid_csv(std::ostream& os, const GridFunction& f, const std::string& name = "u");

/// Reads a file written by write_grid_csv back onto `grid`. Throws std::runtime_error if the
/// node coordinates do not match.
GridFunction read_grid_csv(std::istream& is, const Grid& grid);

}  // namespace hmin

#endif  // HMIN_CSV_HPP
