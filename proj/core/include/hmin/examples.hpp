#ifndef HMIN_EXAMPLES_HPP
#define HMIN_EXAMPLES_HPP

#include <functional>
#include <string>
#include <vector>

#include "hmin/grid.hpp"

namespace hmin {

struct CatalogFlags {
  bool minimal_h0 = false;
  bool vanishing_viscosity_candidate = false;
  bool c1_smooth = false;
  bool leafwise_affine = false;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  std::function<double(Point)> eval;
  std::function<bool(Point)> domain;
  CatalogFlags flags;
  Interval x1_range;  // default box for grids
  Interval x2_range;
};

/// u = x2 / (x1 - sgn x2) on {x1 > 1}, with sgn(0) = +1. Throws std::domain_error for x1 <= 1.
double pauls_graph(Point x);

/// u = a x1 + c.
CatalogEntry affine_graph(double a, double c);

/// Root t of x2 = x1 t - g(t) in `bracket`, by bisection polished with Newton to 1e-12.
/// Throws std::domain_error naming the bracket when the root is missing or not unique.
double shear_graph(const std::function<double(double)>& g, Point x, Interval bracket = {-50.0, 50.0});

/// Catalog entry for a shear with profile g.
CatalogEntry shear_entry(std::string name, std::function<double(double)> g, Interval x1_range, Interval x2_range,
                         CatalogFlags flags, Interval bracket = {-50.0, 50.0});

/// Smooth benchmark: shear with g(t) = sigma log cosh(t / sigma) on [2,3] x [-1,1].
/// A smoothed Pauls example (sigma -> 0 recovers g(t) = |t|).
CatalogEntry logcosh_benchmark(double sigma = 0.5);

/// Names: pauls, affine, constant, x2, shear_zero, shear_linear, shear_logcosh.
std::vector<std::string> catalog_names();
/// Throws std::invalid_argument for unknown names.
CatalogEntry catalog_entry(const std::string& name);

}  // namespace hmin

#endif  // HMIN_EXAMPLES_HPP
