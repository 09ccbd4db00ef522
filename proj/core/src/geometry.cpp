#include "hmin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace hmin {

Frame::Frame(double epsilon, GridFunction u) : epsilon_(epsilon), u_(std::move(u)) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("frame epsilon must be positive");
  }
}

GridFunction apply_x1(const Frame& frame, const GridFunction& f) {
  require_same_grid(frame.u(), f, "apply_x1");
  GridFunction out = partial1(f);
  const GridFunction d2 = partial2(f);
  auto o = out.values();
  const auto u = frame.u().values();
  const auto g = d2.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += u[k] * g[k];
  return out;
}

GridFunction apply_x2(const Frame& frame, const GridFunction& f) {
  require_same_grid(frame.u(), f, "apply_x2");
  return frame.epsilon() * partial2(f);
}

Vec3 LiftedFrame::x1(LiftedPoint p) const { return {1.0, frame_->u().interpolate(p.x) + p.s * p.s, 0.0}; }
Vec3 LiftedFrame::x2(LiftedPoint) const { return {0.0, frame_->epsilon(), 0.0}; }
Vec3 LiftedFrame::x3(LiftedPoint) const { return {0.0, 0.0, 1.0}; }
Vec3 LiftedFrame::bracket13(LiftedPoint p) const { return {0.0, -2.0 * p.s, 0.0}; }
Vec3 LiftedFrame::bracket3_13(LiftedPoint) const { return {0.0, -2.0, 0.0}; }

VectorField3 LiftedFrame::field(int k) const {
  switch (k) {
    case 1: return [this](LiftedPoint p) { return x1(p); };
    case 2: return [this](LiftedPoint p) { return x2(p); };
    case 3: return [this](LiftedPoint p) { return x3(p); };
    default: throw std::invalid_argument("lifted field index must be 1, 2 or 3");
  }
}

double apply_vector(Vec3 v, const ScalarField3& f, LiftedPoint p, double h) {
  double out = 0.0;
  if (v.c1 != 0.0) {
    out += v.c1 * (f({{p.x.x1 + h, p.x.x2}, p.s}) - f({{p.x.x1 - h, p.x.x2}, p.s})) / (2 * h);
  }
  if (v.c2 != 0.0) {
    out += v.c2 * (f({{p.x.x1, p.x.x2 + h}, p.s}) - f({{p.x.x1, p.x.x2 - h}, p.s})) / (2 * h);
  }
  if (v.c3 != 0.0) {
    out += v.c3 * (f({p.x, p.s + h}) - f({p.x, p.s - h})) / (2 * h);
  }
  return out;
}

double apply_field(const VectorField3& X, const ScalarField3& f, LiftedPoint p, double h) {
  return apply_vector(X(p), f, p, h);
}

double apply_bracket(const VectorField3& X, const VectorField3& Y, const ScalarField3& f, LiftedPoint p,
                     double h) {
  const ScalarField3 yf = [&](LiftedPoint q) { return apply_field(Y, f, q, h); };
  const ScalarField3 xf = [&](LiftedPoint q) { return apply_field(X, f, q, h); };
  return apply_field(X, yf, p, h) - apply_field(Y, xf, p, h);
}

double FrozenFrame::p1(Point x) const {
  const double e1 = x.x1 - x0.x1;
  const double eps_e2 = (x.x2 - x0.x2) - e1 * u0;
  return u0 + e1 * x1u0 + (eps_e2 / epsilon) * x2u0;
}

Vec3 FrozenFrame::x1(LiftedPoint p) const { return {1.0, p1(p.x) + p.s * p.s, 0.0}; }
Vec3 FrozenFrame::x2(LiftedPoint) const { return {0.0, epsilon, 0.0}; }
Vec3 FrozenFrame::x3(LiftedPoint) const { return {0.0, 0.0, 1.0}; }

FrozenFrame taylor_p1(const Frame& frame, Point x0) {
  const Grid& g = frame.grid();
  const double fi = (x0.x1 - g.x1_range().lo) / g.h1();
  const double fj = (x0.x2 - g.x2_range().lo) / g.h2();
  const int i = static_cast<int>(std::lround(fi));
  const int j = static_cast<int>(std::lround(fj));
  if (std::abs(fi - i) > 1e-6 || std::abs(fj - j) > 1e-6 || i < 0 || j < 0 || i >= g.n1() || j >= g.n2()) {
    throw std::invalid_argument("taylor_p1: base point must be a grid node");
  }
  if (g.is_boundary(i, j)) {
    throw std::invalid_argument("taylor_p1: base point on the boundary");
  }
  const GridFunction& u = frame.u();
  const double d1 = (u(i + 1, j) - u(i - 1, j)) / (2 * g.h1());
  const double d2 = (u(i, j + 1) - u(i, j - 1)) / (2 * g.h2());
  FrozenFrame ff;
  ff.x0 = g.node(i, j);
  ff.u0 = u(i, j);
  ff.x1u0 = d1 + ff.u0 * d2;
  ff.x2u0 = frame.epsilon() * d2;
  ff.epsilon = frame.epsilon();
  ff.x1_bounds = g.x1_range();
  ff.x2_bounds = g.x2_range();
  return ff;
}

double eval_p1(const FrozenFrame& ff, Point x) { return ff.p1(x); }

namespace {

struct FlowResult {
  double end_x2;
  double integral;  // Simpson integral of the coefficient function along the path
};

// Flow of e1 X1 + e2 X2 + e3 X3 from (x0, 0) over unit time, with X1 = d1 + (coef(x) + s^2) d2.
// Only the x2 component is non-trivial: x1 = x0_1 + e1 t and s = e3 t exactly.
class ExpFlow {
 public:
  ExpFlow(std::function<double(Point)> coef, double eps, Point x0, Interval b1, Interval b2)
      : coef_(std::move(coef)), eps_(eps), x0_(x0), b1_(b1), b2_(b2) {}

  FlowResult run(double e1, double e2, double e3, int n) const {
    const double dt = 1.0 / n;
    double y = x0_.x2;
    std::vector<double> samples(static_cast<std::size_t>(n) + 1);
    auto rhs = [&](double t, double x2) {
      const Point q{x0_.x1 + e1 * t, x2};
      check(q);
      const double s = e3 * t;
      return e1 * (coef_(q) + s * s) + eps_ * e2;
    };
    samples[0] = coef_at(0.0, y, e1);
    for (int k = 0; k < n; ++k) {
      const double t = k * dt;
      const double k1 = rhs(t, y);
      const double k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
      const double k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
      const double k4 = rhs(t + dt, y + dt * k3);
      y += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      samples[static_cast<std::size_t>(k) + 1] = coef_at((k + 1) * dt, y, e1);
    }
    double simpson = samples.front() + samples.back();
    for (int k = 1; k < n; ++k) simpson += (k % 2 ? 4.0 : 2.0) * samples[static_cast<std::size_t>(k)];
    return {y, simpson * dt / 3.0};
  }

 private:
  double coef_at(double t, double x2, double e1) const {
    const Point q{x0_.x1 + e1 * t, x2};
    check(q);
    return coef_(q);
  }

  void check(Point q) const {
    const double t1 = 1e-12 * std::max(1.0, b1_.width());
    const double t2 = 1e-12 * std::max(1.0, b2_.width());
    if (!(q.x1 >= b1_.lo - t1 && q.x1 <= b1_.hi + t1 && q.x2 >= b2_.lo - t2 && q.x2 <= b2_.hi + t2)) {
      throw std::out_of_range("exponential-coordinate flow path exits the grid");
    }
  }

  std::function<double(Point)> coef_;
  double eps_;
  Point x0_;
  Interval b1_, b2_;
};

// Solves for e2 so that the flow lands on p, then reports e2 through the closed form
//   eps e2 = (x - x0)_2 - (x - x0)_1 (int_0^1 coef(gamma) dtau + s^2/3).
ExpCoords exp_coords_impl(const ExpFlow& flow, double eps, Point x0, double coef0, LiftedPoint p,
                          const QuadratureOptions& opts) {
  if (!(std::abs(p.s) < 1.0)) {
    throw std::invalid_argument("lifted point must have |s| < 1");
  }
  if (opts.initial_intervals < 2 || opts.initial_intervals % 2 != 0) {
    throw std::invalid_argument("Simpson quadrature needs an even number of intervals");
  }
  const double e1 = p.x.x1 - x0.x1;
  const double e3 = p.s;
  const double d2 = p.x.x2 - x0.x2;
  const double s_term = e3 * e3 / 3.0;
  if (e1 == 0.0) {
    return {0.0, d2 / eps, e3};
  }

  auto solve = [&](int n) {
    // Secant iteration on the landing height; slope in e2 is eps times a positive factor.
    double e2 = (d2 - e1 * (coef0 + s_term)) / eps;
    FlowResult fr = flow.run(e1, e2, e3, n);
    double r = fr.end_x2 - p.x.x2;
    double slope = eps;
    const double tol = 1e-14 * (1.0 + std::abs(p.x.x2) + std::abs(d2));
    for (int it = 0; it < 60 && std::abs(r) > tol; ++it) {
      const double next = e2 - r / slope;
      FlowResult fn = flow.run(e1, next, e3, n);
      const double rn = fn.end_x2 - p.x.x2;
      if (next != e2 && rn != r) slope = (rn - r) / (next - e2);
      if (!(slope > 0.0) || !std::isfinite(slope)) slope = eps;
      e2 = next;
      r = rn;
      fr = fn;
    }
    return (d2 - e1 * (fr.integral + s_term)) / eps;
  };

  int n = opts.initial_intervals;
  double prev = solve(n);
  while (n < opts.max_intervals) {
    n *= 2;
    const double cur = solve(n);
    const double scale = std::max(std::abs(cur), 1e-300);
    if (std::abs(cur - prev) <= opts.relative_tolerance * scale || cur == prev) {
      return {e1, cur, e3};
    }
    prev = cur;
  }
  return {e1, prev, e3};
}

}  // namespace

ExpCoords exp_coords_lifted(const Frame& frame, Point x0, LiftedPoint p, const QuadratureOptions& opts) {
  const GridFunction& u = frame.u();
  if (!frame.grid().contains(x0) || !frame.grid().contains(p.x)) {
    throw std::out_of_range("exp_coords_lifted: point outside grid");
  }
  ExpFlow flow([&u](Point q) { return u.interpolate(q); }, frame.epsilon(), x0, frame.grid().x1_range(),
               frame.grid().x2_range());
  return exp_coords_impl(flow, frame.epsilon(), x0, u.interpolate(x0), p, opts);
}

ExpCoords exp_coords_frozen(const FrozenFrame& ff, LiftedPoint p, const QuadratureOptions& opts) {
  if (!ff.x1_bounds.contains(p.x.x1) || !ff.x2_bounds.contains(p.x.x2)) {
    throw std::out_of_range("exp_coords_frozen: point outside domain");
  }
  ExpFlow flow([&ff](Point q) { return ff.p1(q); }, ff.epsilon, ff.x0, ff.x1_bounds, ff.x2_bounds);
  return exp_coords_impl(flow, ff.epsilon, ff.x0, ff.u0, p, opts);
}

double dist_surrogate_eps(const FrozenFrame& ff, LiftedPoint p, const QuadratureOptions& opts) {
  const ExpCoords e = exp_coords_frozen(ff, p, opts);
  const double eps_e2 = std::abs(ff.epsilon * e.e2);
  const double mid = std::min(e.e2 * e.e2, std::cbrt(eps_e2 * eps_e2));
  return std::sqrt(e.e1 * e.e1 + mid + e.e3 * e.e3);
}

double dist_surrogate_cc(const FrozenFrame& ff, LiftedPoint p, const QuadratureOptions& opts) {
  const ExpCoords e = exp_coords_frozen(ff, p, opts);
  const double eps_e2 = ff.epsilon * e.e2;
  return std::pow(std::pow(e.e1, 6) + eps_e2 * eps_e2 + std::pow(e.e3, 6), 1.0 / 6.0);
}

double taylor_remainder_exponent(const Frame& frame, Point x0, std::span<const double> radii) {
  const FrozenFrame ff = taylor_p1(frame, x0);
  const Grid& g = frame.grid();
  const GridFunction& u = frame.u();
  const int i0 = static_cast<int>(std::lround((ff.x0.x1 - g.x1_range().lo) / g.h1()));
  const int j0 = static_cast<int>(std::lround((ff.x0.x2 - g.x2_range().lo) / g.h2()));

  static constexpr int kDirs[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},   {-1, -1}, {1, -1}, {-1, 1},
                                       {2, 1},  {-2, -1}, {1, 2}, {-1, -2}, {2, -1}, {-2, 1},  {1, -2}, {-1, 2}};

  // Remainder scale below which the sample is treated as exactly zero.
  const double zero_tol = 1e-11 * (1.0 + std::abs(ff.u0) + std::abs(ff.x1u0) + std::abs(ff.x2u0 / ff.epsilon));

  std::map<int, std::vector<std::pair<double, double>>> rays;  // direction -> (log d, log rem)
  int candidates = 0;
  int zero_count = 0;
  for (int dir = 0; dir < 16; ++dir) {
    const int a = kDirs[dir][0], b = kDirs[dir][1];
    const double step = std::hypot(a * g.h1(), b * g.h2());
    int last_k = 0;
    for (double r : radii) {
      const int k = std::max(1, static_cast<int>(std::lround(r / step)));
      if (k == last_k) continue;
      last_k = k;
      const int i = i0 + k * a, j = j0 + k * b;
      if (i < 0 || j < 0 || i >= g.n1() || j >= g.n2()) continue;
      const Point x = g.node(i, j);
      double d = 0.0;
      try {
        d = dist_surrogate_eps(ff, {x, 0.0});
      } catch (const std::out_of_range&) {
        continue;
      }
      ++candidates;
      const double rem = std::abs(u(i, j) - ff.p1(x));
      if (rem <= zero_tol) {
        ++zero_count;
        continue;
      }
      if (d > 0.0) rays[dir].emplace_back(std::log(d), std::log(rem));
    }
  }

  // Slope with a separate intercept per ray: the angular dependence of the remainder drops out.
  double sxy = 0.0, sxx = 0.0;
  int used = 0;
  for (auto& [dir, pts] : rays) {
    if (pts.size() < 2) continue;
    double mx = 0.0, my = 0.0;
    for (auto& [lx, ly] : pts) {
      mx += lx;
      my += ly;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    for (auto& [lx, ly] : pts) {
      sxy += (lx - mx) * (ly - my);
      sxx += (lx - mx) * (lx - mx);
    }
    used += static_cast<int>(pts.size());
  }
  if (used < 8) {
    if (candidates >= 8 && zero_count == candidates) return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("taylor_remainder_exponent: fewer than 8 valid samples");
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("taylor_remainder_exponent: degenerate sample radii");
  return sxy / sxx;
}

}  // namespace hmin
