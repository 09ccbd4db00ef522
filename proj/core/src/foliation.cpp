#include "hmin/foliation.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hmin/csv.hpp"

namespace hmin {

namespace {

struct Rect {
  Interval r1, r2;
  bool contains(Point p) const {
    const double t1 = 1e-12 * std::max(1.0, r1.width()), t2 = 1e-12 * std::max(1.0, r2.width());
    return p.x1 >= r1.lo - t1 && p.x1 <= r1.hi + t1 && p.x2 >= r2.lo - t2 && p.x2 <= r2.hi + t2;
  }
};

struct Sample {
  double t;
  double x2;
  double u;
};

// Integrates from t = 0 towards t_end (sign gives the direction). Returns the samples after t = 0.
std::vector<Sample> integrate(const ScalarField& u, const Rect& rect, Point start, double t_end, double dt) {
  std::vector<Sample> out;
  const double dir = t_end >= 0 ? 1.0 : -1.0;
  // The leaf also ends where gamma_1 reaches the x1 edge.
  const double edge = dir > 0 ? rect.r1.hi - start.x1 : rect.r1.lo - start.x1;
  const double t_lim = dir > 0 ? std::min(t_end, edge) : std::max(t_end, edge);
  double t = 0.0, x2 = start.x2;
  for (long k = 0;; ++k) {
    const double remaining = (t_lim - t) * dir;
    if (remaining <= 1e-12 * dt) break;
    const bool last = remaining <= dt * (1 + 1e-12);
    const double t_next = last ? t_lim : static_cast<double>(k + 1) * dir * dt;
    const double h = t_next - t;
    auto f = [&](double tt, double y) {
      const Point p{start.x1 + tt, y};
      if (!rect.contains(p)) throw std::out_of_range("leaf leaves the domain");
      return u(p);
    };
    double next;
    try {
      const double k1 = f(t, x2);
      const double k2 = f(t + h / 2, x2 + h / 2 * k1);
      const double k3 = f(t + h / 2, x2 + h / 2 * k2);
      const double k4 = f(t + h, x2 + h * k3);
      next = x2 + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!rect.contains({start.x1 + t_next, next})) break;
      out.push_back({t_next, next, u({start.x1 + t_next, next})});
    } catch (const std::out_of_range&) {
      break;
    }
    t = t_next;
    x2 = next;
  }
  return out;
}

Leaf trace(const ScalarField& u, const Rect& rect, Point start, Interval t_span, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("trace_leaf: dt must be positive");
  if (!(t_span.lo <= 0 && t_span.hi >= 0)) throw std::invalid_argument("trace_leaf: t_span must contain 0");
  if (!rect.contains(start)) throw std::out_of_range("trace_leaf: start outside the grid");

  const std::vector<Sample> back = integrate(u, rect, start, t_span.lo, dt);
  const std::vector<Sample> fwd = integrate(u, rect, start, t_span.hi, dt);
  Leaf leaf;
  leaf.start = start;
  auto push = [&](const Sample& s) {
    leaf.t.push_back(s.t);
    leaf.points.push_back({start.x1 + s.t, s.x2});
    leaf.u_values.push_back(s.u);
  };
  for (auto it = back.rbegin(); it != back.rend(); ++it) push(*it);
  push({0.0, start.x2, u(start)});
  for (const Sample& s : fwd) push(s);
  if (leaf.t.size() < 2) throw std::invalid_argument("trace_leaf: zero-length leaf");
  return leaf;
}

// Least squares in the scaled variable (t - tc) / half, mapped back to monomials in (t - tc).
template <int D>
std::array<double, D + 1> poly_fit(const std::vector<double>& t, const std::vector<double>& y, double tc, double half,
                                   double& rms) {
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd A(n, D + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double s = (t[static_cast<std::size_t>(r)] - tc) / half;
    double pw = 1.0;
    for (int k = 0; k <= D; ++k) {
      A(r, k) = pw;
      pw *= s;
    }
    b[r] = y[static_cast<std::size_t>(r)];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  rms = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
  std::array<double, D + 1> out{};
  double scale = 1.0;
  for (int k = 0; k <= D; ++k) {
    out[static_cast<std::size_t>(k)] = c[k] / scale;
    scale *= half;
  }
  return out;
}

double gamma2_at(const Leaf& leaf, double x1) {
  auto it = std::lower_bound(leaf.points.begin(), leaf.points.end(), x1,
                             [](const Point& p, double v) { return p.x1 < v; });
  if (it == leaf.points.begin()) return it->x2;
  if (it == leaf.points.end()) return leaf.points.back().x2;
  const Point& b = *it;
  const Point& a = *(it - 1);
  const double w = (x1 - a.x1) / (b.x1 - a.x1);
  return a.x2 + w * (b.x2 - a.x2);
}

void mark_leaf(const Grid& g, const Leaf& leaf, std::vector<char>& mask) {
  const double h = std::max(g.h1(), g.h2());
  const double x1lo = leaf.points.front().x1, x1hi = leaf.points.back().x1;
  const int i0 = std::max(1, static_cast<int>(std::ceil((x1lo - g.x1(0)) / g.h1() - 1e-9)));
  const int i1 = std::min(g.n1() - 2, static_cast<int>(std::floor((x1hi - g.x1(0)) / g.h1() + 1e-9)));
  for (int i = i0; i <= i1; ++i) {
    const double y = gamma2_at(leaf, g.x1(i));
    const int j0 = std::max(1, static_cast<int>(std::ceil((y - h - g.x2(0)) / g.h2() - 1e-9)));
    const int j1 = std::min(g.n2() - 2, static_cast<int>(std::floor((y + h - g.x2(0)) / g.h2() + 1e-9)));
    for (int j = j0; j <= j1; ++j) mask[g.index(i, j)] = 1;
  }
}

double mask_fraction(const Grid& g, const std::vector<char>& mask) {
  std::size_t hit = 0, total = 0;
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) {
      ++total;
      hit += mask[g.index(i, j)] ? 1 : 0;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace

Leaf trace_leaf(const GridFunction& u, Point start, Interval t_span, double dt) {
  const Grid& g = u.grid();
  return trace([&u](Point p) { return u.interpolate(p); }, Rect{g.x1_range(), g.x2_range()}, start, t_span, dt);
}

Leaf trace_leaf(const ScalarField& u, Interval x1_range, Interval x2_range, Point start, Interval t_span, double dt) {
  return trace(u, Rect{x1_range, x2_range}, start, t_span, dt);
}

Leaf fit_leaf(Leaf leaf) {
  const std::size_t n = leaf.t.size();
  if (n < 8) throw std::invalid_argument("fit_leaf: need at least 8 samples");
  for (std::size_t k = 1; k < n; ++k) {
    if (!(leaf.t[k] > leaf.t[k - 1])) throw std::invalid_argument("fit_leaf: degenerate sample spacing");
  }
  const double half = 0.5 * leaf.length();
  if (!(half > 1e-14)) throw std::invalid_argument("fit_leaf: degenerate sample spacing");
  leaf.t_center = 0.5 * (leaf.t.front() + leaf.t.back());

  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = leaf.points[k].x2;
  double rms = 0.0;
  leaf.poly_fit = poly_fit<3>(leaf.t, y, leaf.t_center, half, rms);
  leaf.cubic_residual = rms / leaf.length();
  leaf.quad_fit = poly_fit<2>(leaf.t, y, leaf.t_center, half, rms);
  leaf.quadratic_residual = rms / leaf.length();
  leaf.u_fit = poly_fit<2>(leaf.t, leaf.u_values, leaf.t_center, half, rms);
  leaf.u_fit_residual = rms;
  leaf.fitted = true;
  return leaf;
}

std::vector<LieDerivativeSample> lie_derivatives(const Leaf& leaf, int stride) {
  const int n = static_cast<int>(leaf.t.size());
  if (n < 5) throw std::invalid_argument("lie_derivatives: need at least 5 samples");
  if (stride < 1 || 2 * stride >= n) throw std::invalid_argument("lie_derivatives: stride too large for leaf");
  std::vector<LieDerivativeSample> out;
  for (int k = stride; k < n - stride; ++k) {
    const double hm = leaf.t[k] - leaf.t[k - stride];
    const double hp = leaf.t[k + stride] - leaf.t[k];
    const double fm = leaf.u_values[k - stride], f0 = leaf.u_values[k], fp = leaf.u_values[k + stride];
    const double den = hm * hp * (hm + hp);
    out.push_back({leaf.t[k], (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / den,
                   2.0 * (hm * fp - (hm + hp) * f0 + hp * fm) / den});
  }
  return out;
}

double leaf_coverage(const Grid& grid, const std::vector<Leaf>& leaves) {
  std::vector<char> mask(grid.size(), 0);
  for (const Leaf& l : leaves) mark_leaf(grid, l, mask);
  return mask_fraction(grid, mask);
}

FoliationCover foliation_cover(const GridFunction& u, double seed_spacing, double dt, bool fill_gaps) {
  if (!(seed_spacing > 0)) throw std::invalid_argument("foliation_cover: seed spacing must be positive");
  const Grid& g = u.grid();
  if (!(dt > 0)) dt = 0.5 * g.h1();
  const double w = g.x1_range().width();
  const Interval span{-w, w};

  FoliationCover cover;
  std::vector<char> mask(g.size(), 0);
  auto add = [&](Point seed) {
    try {
      cover.leaves.push_back(trace_leaf(u, seed, span, dt));
      mark_leaf(g, cover.leaves.back(), mask);
      return true;
    } catch (const std::invalid_argument&) {
      return false;  // seed on an outflow corner
    }
  };

  const Interval r1 = g.x1_range(), r2 = g.x2_range();
  const int n_left = static_cast<int>(std::floor(r2.width() / seed_spacing + 1e-9));
  for (int k = 0; k <= n_left; ++k) add({r1.lo, r2.lo + k * seed_spacing});
  const int n_edge = static_cast<int>(std::floor(r1.width() / seed_spacing + 1e-9));
  for (int k = 1; k <= n_edge; ++k) {
    const double x1 = r1.lo + k * seed_spacing;
    if (u.interpolate({x1, r2.lo}) > 0) add({x1, r2.lo});
    if (u.interpolate({x1, r2.hi}) < 0) add({x1, r2.hi});
  }
  cover.inflow_coverage = mask_fraction(g, mask);

  if (fill_gaps) {
    for (int j = 1; j < g.n2() - 1; ++j) {
      for (int i = 1; i < g.n1() - 1; ++i) {
        if (mask[g.index(i, j)]) continue;
        if (add(g.node(i, j))) ++cover.gap_seeds;
      }
    }
  }
  cover.coverage = mask_fraction(g, mask);
  return cover;
}

int count_crossings(const std::vector<Leaf>& leaves, double tol) {
  int crossings = 0;
  for (std::size_t a = 0; a < leaves.size(); ++a) {
    for (std::size_t b = a + 1; b < leaves.size(); ++b) {
      const Leaf& la = leaves[a];
      const Leaf& lb = leaves[b];
      const double lo = std::max(la.points.front().x1, lb.points.front().x1);
      const double hi = std::min(la.points.back().x1, lb.points.back().x1);
      if (!(hi > lo)) continue;
      int sign = 0;
      bool crossed = false;
      for (const Point& p : la.points) {
        if (p.x1 < lo || p.x1 > hi) continue;
        const double d = p.x2 - gamma2_at(lb, p.x1);
        if (std::abs(d) <= tol) continue;
        const int s = d > 0 ? 1 : -1;
        if (sign != 0 && s != sign) crossed = true;
        sign = s;
      }
      crossings += crossed ? 1 : 0;
    }
  }
  return crossings;
}

void write_leaf_csv(std::ostream& os, const Leaf& leaf, const std::vector<LieDerivativeSample>& lie) {
  os << "t,x1,x2,u,first,second\n";
  for (const LieDerivativeSample& s : lie) {
    const auto it = std::lower_bound(leaf.t.begin(), leaf.t.end(), s.t);
    if (it == leaf.t.end() || *it != s.t) throw std::invalid_argument("write_leaf_csv: sample not on leaf");
    const std::size_t k = static_cast<std::size_t>(it - leaf.t.begin());
    write_csv_row(os, {s.t, leaf.points[k].x1, leaf.points[k].x2, leaf.u_values[k], s.first, s.second});
  }
}

}  // namespace hmin
