#ifndef HMIN_FOLIATION_HPP
#define HMIN_FOLIATION_HPP

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hmin/grid.hpp"

namespace hmin {

/// An integral curve of X1 = d1 + u d2, i.e. gamma' = (1, u(gamma)), parametrized so that
/// gamma_1(t) = start_1 + t.
struct Leaf {
  Point start;
  std::vector<double> t;
  std::vector<Point> points;
  std::vector<double> u_values;

  // Filled by fit_leaf. Coefficients are for monomials in (t - t_center).
  bool fitted = false;
  double t_center = 0.0;
  std::array<double, 4> poly_fit{};  // cubic fit of gamma_2
  std::array<double, 3> quad_fit{};  // quadratic fit of gamma_2
  std::array<double, 3> u_fit{};     // quadratic fit of u(gamma)
  double cubic_residual = 0.0;       // rms residual / leaf length
  double quadratic_residual = 0.0;   // rms residual / leaf length
  double u_fit_residual = 0.0;       // rms residual, absolute

  double c3() const { return poly_fit[3]; }
  double length() const { return t.empty() ? 0.0 : t.back() - t.front(); }
};

struct LieDerivativeSample {
  double t = 0.0;
  double first = 0.0;   // d/dt u(gamma(t))
  double second = 0.0;  // d2/dt2 u(gamma(t))
};

using ScalarField = std::function<double(Point)>;

/// RK4 from `start` over t in t_span (t_span.lo <= 0 <= t_span.hi), both directions, with u
/// bilinearly interpolated. Stops at the grid boundary; the last step is shortened to land on
/// the x1 edges. Throws std::out_of_range if start is outside, std::invalid_argument on a
/// zero-length leaf or non-positive dt.
Leaf trace_leaf(const GridFunction& u, Point start, Interval t_span, double dt);

/// Same, for a closed-form u on the rectangle x1_range x x2_range.
Leaf trace_leaf(const ScalarField& u, Interval x1_range, Interval x2_range, Point start, Interval t_span, double dt);

/// Least-squares fits with centered monomials. Throws std::invalid_argument with fewer than
/// 8 samples or degenerate spacing.
Leaf fit_leaf(Leaf leaf);

/// Three-point differences of u(gamma) in t with the given sample stride. Samples are returned
/// for indices stride .. n-1-stride. Throws std::invalid_argument with fewer than 5 samples.
std::vector<LieDerivativeSample> lie_derivatives(const Leaf& leaf, int stride = 1);

struct FoliationCover {
  std::vector<Leaf> leaves;
  double coverage = 0.0;         // fraction of interior nodes within h of a leaf
  double inflow_coverage = 0.0;  // same, before gap filling
  int gap_seeds = 0;
};

/// Seeds leaves along the inflow boundary (x1 = lo; x2 = lo where u > 0; x2 = hi where u < 0),
/// traced forward and backward with dt (default h1/2). When fill_gaps is set, interior nodes
/// still farther than h from every leaf seed extra leaves.
FoliationCover foliation_cover(const GridFunction& u, double seed_spacing, double dt = 0.0, bool fill_gaps = true);

/// Fraction of interior nodes whose vertical distance to some leaf (at the node's x1) is <= h.
double leaf_coverage(const Grid& grid, const std::vector<Leaf>& leaves);

/// Number of leaf pairs whose gamma_2 difference changes sign at common x1 by more than `tol`.
int count_crossings(const std::vector<Leaf>& leaves, double tol = 1e-9);

/// CSV with header t,x1,x2,u,first,second; one row per Lie derivative sample.
void write_leaf_csv(std::ostream& os, const Leaf& leaf, const std::vector<LieDerivativeSample>& lie);

}  // namespace hmin

#endif  // HMIN_FOLIATION_HPP
