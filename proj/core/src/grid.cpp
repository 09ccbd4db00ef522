#include "hmin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hmin {

Grid::Grid(Interval x1_range, Interval x2_range, int n1, int n2)
    : x1_range_(x1_range), x2_range_(x2_range), n1_(n1), n2_(n2) {
  if (n1 < 3 || n2 < 3) {
    throw std::invalid_argument("grid needs at least 3 nodes per direction");
  }
  if (!(x1_range.width() > 0.0) || !(x2_range.width() > 0.0)) {
    throw std::invalid_argument("grid ranges must have positive width");
  }
  h1_ = x1_range.width() / (n1 - 1);
  h2_ = x2_range.width() / (n2 - 1);
}

Grid Grid::unit_square(int n) { return Grid({0.0, 1.0}, {0.0, 1.0}, n, n); }

IndexBox Grid::interior(int margin) const {
  return {margin, n1_ - 1 - margin, margin, n2_ - 1 - margin};
}

IndexBox Grid::compact(double distance, int min_margin) const {
  const int m1 = std::max(min_margin, static_cast<int>(std::ceil(distance / h1_ - 1e-9)));
  const int m2 = std::max(min_margin, static_cast<int>(std::ceil(distance / h2_ - 1e-9)));
  return {m1, n1_ - 1 - m1, m2, n2_ - 1 - m2};
}

bool operator==(const Grid& a, const Grid& b) {
  return a.n1_ == b.n1_ && a.n2_ == b.n2_ && a.x1_range_.lo == b.x1_range_.lo &&
         a.x1_range_.hi == b.x1_range_.hi && a.x2_range_.lo == b.x2_range_.lo &&
         a.x2_range_.hi == b.x2_range_.hi;
}

GridFunction::GridFunction(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(Point)>& f) {
  GridFunction out(grid);
  for (int j = 0; j < grid.n2(); ++j) {
    for (int i = 0; i < grid.n1(); ++i) {
      out(i, j) = f(grid.node(i, j));
    }
  }
  return out;
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::sup_norm(const IndexBox& box) const {
  double m = 0.0;
  for (int j = box.j0; j <= box.j1; ++j) {
    for (int i = box.i0; i <= box.i1; ++i) m = std::max(m, std::abs((*this)(i, j)));
  }
  return m;
}

double GridFunction::lip_norm() const {
  double m = 0.0;
  const int n1 = grid_.n1(), n2 = grid_.n2();
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      if (i + 1 < n1) m = std::max(m, std::abs((*this)(i + 1, j) - (*this)(i, j)) / grid_.h1());
      if (j + 1 < n2) m = std::max(m, std::abs((*this)(i, j + 1) - (*this)(i, j)) / grid_.h2());
    }
  }
  return m;
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::interpolate(Point p) const {
  // Small tolerance so points produced by x = lo + k*h arithmetic on the edge are accepted.
  const double tol1 = 1e-12 * std::max(1.0, grid_.x1_range().width());
  const double tol2 = 1e-12 * std::max(1.0, grid_.x2_range().width());
  if (p.x1 < grid_.x1_range().lo - tol1 || p.x1 > grid_.x1_range().hi + tol1 ||
      p.x2 < grid_.x2_range().lo - tol2 || p.x2 > grid_.x2_range().hi + tol2 || !std::isfinite(p.x1) ||
      !std::isfinite(p.x2)) {
    throw std::out_of_range("interpolation point (" + std::to_string(p.x1) + ", " + std::to_string(p.x2) +
                            ") outside grid");
  }
  const double s1 = (p.x1 - grid_.x1_range().lo) / grid_.h1();
  const double s2 = (p.x2 - grid_.x2_range().lo) / grid_.h2();
  const int i = std::clamp(static_cast<int>(std::floor(s1)), 0, grid_.n1() - 2);
  const int j = std::clamp(static_cast<int>(std::floor(s2)), 0, grid_.n2() - 2);
  const double a = std::clamp(s1 - i, 0.0, 1.0);
  const double b = std::clamp(s2 - j, 0.0, 1.0);
  const auto& f = *this;
  return (1 - a) * (1 - b) * f(i, j) + a * (1 - b) * f(i + 1, j) + (1 - a) * b * f(i, j + 1) +
         a * b * f(i + 1, j + 1);
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument(std::string("grid mismatch in ") + what);
  }
}

namespace {

// Second-order derivative along one index direction. `stride` is the storage step between
// neighbours, `n` the node count in that direction, `pos` the node position along it.
inline double diff(const double* v, std::ptrdiff_t stride, int pos, int n, double h) {
  if (pos == 0) return (-3.0 * v[0] + 4.0 * v[stride] - v[2 * stride]) / (2.0 * h);
  if (pos == n - 1) return (3.0 * v[0] - 4.0 * v[-stride] + v[-2 * stride]) / (2.0 * h);
  return (v[stride] - v[-stride]) / (2.0 * h);
}

}  // namespace

GridFunction partial1(const GridFunction& f) {
  const Grid& g = f.grid();
  GridFunction out(g);
  const double* base = f.values().data();
  for (int j = 0; j < g.n2(); ++j) {
    for (int i = 0; i < g.n1(); ++i) {
      out(i, j) = diff(base + g.index(i, j), 1, i, g.n1(), g.h1());
    }
  }
  return out;
}

GridFunction partial2(const GridFunction& f) {
  const Grid& g = f.grid();
  GridFunction out(g);
  const double* base = f.values().data();
  const auto stride = static_cast<std::ptrdiff_t>(g.n1());
  for (int j = 0; j < g.n2(); ++j) {
    for (int i = 0; i < g.n1(); ++i) {
      out(i, j) = diff(base + g.index(i, j), stride, j, g.n2(), g.h2());
    }
  }
  return out;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "subtraction");
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = a.values()[k] - b.values()[k];
  return out;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "addition");
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = a.values()[k] + b.values()[k];
  return out;
}

GridFunction operator*(double s, const GridFunction& a) {
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = s * a.values()[k];
  return out;
}

}  // namespace hmin
