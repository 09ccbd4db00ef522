#ifndef HMIN_GEOMETRY_HPP
#define HMIN_GEOMETRY_HPP

#include <functional>
#include <optional>
#include <span>

#include "hmin/grid.hpp"

namespace hmin {

/// The moving frame attached to a graph function u:
///   X1 = d1 + u d2,   X2 = eps d2,   grad_eps = (X1, X2).
class Frame {
 public:
  Frame(double epsilon, GridFunction u);

  double epsilon() const { return epsilon_; }
  const GridFunction& u() const { return u_; }
  const Grid& grid() const { return u_.grid(); }

 private:
  double epsilon_;
  GridFunction u_;
};

/// Discrete X1 f = d1 f + u d2 f (second order everywhere, one-sided on the boundary).
GridFunction apply_x1(const Frame& frame, const GridFunction& f);
/// Discrete X2 f = eps d2 f.
GridFunction apply_x2(const Frame& frame, const GridFunction& f);

/// A point (x, s) of the lifted space Omega x (-1, 1).
struct LiftedPoint {
  Point x;
  double s = 0.0;
};

/// Components of a vector field in the (d1, d2, ds) basis.
struct Vec3 {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

using VectorField3 = std::function<Vec3(LiftedPoint)>;
using ScalarField3 = std::function<double(LiftedPoint)>;

/// Lifted fields X1~ = d1 + (u(x) + s^2) d2, X2~ = eps d2, X3~ = ds, with u bilinearly interpolated.
class LiftedFrame {
 public:
  explicit LiftedFrame(const Frame& frame) : frame_(&frame) {}
  LiftedFrame(Frame&&) = delete;

  Vec3 x1(LiftedPoint p) const;
  Vec3 x2(LiftedPoint p) const;
  Vec3 x3(LiftedPoint p) const;
  /// [X1~, X3~] = -2 s d2.
  Vec3 bracket13(LiftedPoint p) const;
  /// [X3~, [X1~, X3~]] = -2 d2.
  Vec3 bracket3_13(LiftedPoint p) const;

  VectorField3 field(int k) const;

 private:
  const Frame* frame_;
};

/// X f at p by central differences of step h.
double apply_field(const VectorField3& X, const ScalarField3& f, LiftedPoint p, double h);
/// [X, Y] f = X(Y f) - Y(X f) at p, nested central differences of step h.
double apply_bracket(const VectorField3& X, const VectorField3& Y, const ScalarField3& f, LiftedPoint p,
                     double h);
/// Vector field V applied to f: V . grad f, with the gradient taken by central differences.
double apply_vector(Vec3 v, const ScalarField3& f, LiftedPoint p, double h);

/// Frozen frame at x0: the intrinsic first-order Taylor polynomial
///   P1(x) = u(x0) + e1(x) X1~u(x0,0) + e2(x) X2~u(x0,0),
///   e1 = (x - x0)_1,  eps e2 = (x - x0)_2 - (x - x0)_1 u(x0),
/// and the frozen fields X1 = d1 + (P1(x) + s^2) d2, X2 = eps d2, X3 = ds.
struct FrozenFrame {
  Point x0;
  double u0 = 0.0;
  double x1u0 = 0.0;
  double x2u0 = 0.0;
  double epsilon = 1.0;
  /// Region in which flow paths must stay (the grid rectangle of the source frame).
  Interval x1_bounds{-1e300, 1e300};
  Interval x2_bounds{-1e300, 1e300};

  double p1(Point x) const;
  Vec3 x1(LiftedPoint p) const;
  Vec3 x2(LiftedPoint p) const;
  Vec3 x3(LiftedPoint p) const;
};

/// Freezes `frame` at the interior node x0. Throws std::invalid_argument when x0 is not a node
/// or sits on the boundary.
FrozenFrame taylor_p1(const Frame& frame, Point x0);
double eval_p1(const FrozenFrame& ff, Point x);

struct ExpCoords {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
};

struct QuadratureOptions {
  int initial_intervals = 32;
  double relative_tolerance = 1e-9;
  int max_intervals = 1 << 14;
};

/// Exponential coordinates of p based at (x0, 0) for the lifted fields. The path integral of u is
/// evaluated by composite Simpson along the connecting flow, intervals doubled until stable.
/// Throws std::out_of_range if the flow leaves the grid.
ExpCoords exp_coords_lifted(const Frame& frame, Point x0, LiftedPoint p, const QuadratureOptions& opts = {});
/// Same construction for the frozen fields (P1 replaces u).
ExpCoords exp_coords_frozen(const FrozenFrame& ff, LiftedPoint p, const QuadratureOptions& opts = {});

/// sqrt(e1^2 + min(e2^2, (eps e2)^(2/3)) + e3^2) in frozen coordinates.
double dist_surrogate_eps(const FrozenFrame& ff, LiftedPoint p, const QuadratureOptions& opts = {});
/// (e1^6 + (eps e2)^2 + e3^6)^(1/6) in frozen coordinates.
double dist_surrogate_cc(const FrozenFrame& ff, LiftedPoint p, const QuadratureOptions& opts = {});

/// Search box of the distance oracle, centred at (x0, 0). The x2 extent is measured in the sheared
/// coordinate w = x2 - x0_2 - u0 (x1 - x0_1), which follows the frozen leaf through x0.
struct OracleBox {
  double x1_half = 0.0;
  double w_half = 0.0;
  double s_half = 0.0;
};

/// Box sized from the eps-surrogate of p with a safety factor.
OracleBox default_oracle_box(const FrozenFrame& ff, LiftedPoint p, double delta);

/// Brute-force control distance d_{x0,eps}((x0,0), p): Dijkstra on the lattice whose edges are Euler
/// steps of parameter length delta along +-X1, +-X2, +-X3 of the frozen frame. A lattice node in the
/// (x1, s) fiber of p is joined to p by partial X1 and X3 steps and an X2 segment, and the shortest
/// such total is returned. Throws std::runtime_error when p cannot be reached inside the box.
double dist_oracle(const FrozenFrame& ff, LiftedPoint p, double delta, std::optional<OracleBox> box = {});

/// Fitted exponent of |u - P1| against the eps-surrogate distance around x0, sampled on rays of
/// grid nodes at the given radii. Returns +infinity when the remainder vanishes identically;
/// throws std::invalid_argument with fewer than 8 usable samples.
double taylor_remainder_exponent(const Frame& frame, Point x0, std::span<const double> radii);

}  // namespace hmin

#endif  // HMIN_GEOMETRY_HPP
