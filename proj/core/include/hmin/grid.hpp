#ifndef HMIN_GRID_HPP
#define HMIN_GRID_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hmin {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Inclusive rectangle of node indices.
struct IndexBox {
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;

  bool empty() const { return i1 < i0 || j1 < j0; }
  bool contains(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  std::size_t count() const {
    return empty() ? 0 : static_cast<std::size_t>(i1 - i0 + 1) * static_cast<std::size_t>(j1 - j0 + 1);
  }
};

/// Uniform tensor grid on a rectangle. Node (i, j) sits at (x1.lo + i*h1, x2.lo + j*h2);
/// storage is row-major in j, so i is the fastest index.
class Grid {
 public:
  Grid() = default;
  Grid(Interval x1_range, Interval x2_range, int n1, int n2);

  /// Unit square with n x n nodes.
  static Grid unit_square(int n);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  const Interval& x1_range() const { return x1_range_; }
  const Interval& x2_range() const { return x2_range_; }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_); }

  double x1(int i) const { return x1_range_.lo + i * h1_; }
  double x2(int j) const { return x2_range_.lo + j * h2_; }
  Point node(int i, int j) const { return {x1(i), x2(j)}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n1_) + static_cast<std::size_t>(i);
  }

  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == n1_ - 1 || j == n2_ - 1; }
  bool contains(Point p) const { return x1_range_.contains(p.x1) && x2_range_.contains(p.x2); }

  /// Nodes at least `margin` index steps away from the boundary.
  IndexBox interior(int margin = 1) const;
  /// Nodes at physical distance >= `distance` from the boundary, and never closer than
  /// `min_margin` index steps.
  IndexBox compact(double distance, int min_margin = 1) const;

  friend bool operator==(const Grid& a, const Grid& b);

 private:
  Interval x1_range_{};
  Interval x2_range_{};
  int n1_ = 0;
  int n2_ = 0;
  double h1_ = 0.0;
  double h2_ = 0.0;
};

/// Scalar field on a Grid.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const Grid& grid, double fill = 0.0);

  static GridFunction sample(const Grid& grid, const std::function<double(Point)>& f);

  const Grid& grid() const { return grid_; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double sup_norm() const;
  double sup_norm(const IndexBox& box) const;
  /// Largest difference quotient between horizontally or vertically adjacent nodes.
  double lip_norm() const;
  double min() const;
  double max() const;

  /// Bilinear interpolation. Throws std::out_of_range outside the grid rectangle.
  double interpolate(Point p) const;

  bool all_finite() const;

 private:
  Grid grid_{};
  std::vector<double> values_;
};

/// Throws std::invalid_argument when the two fields live on different grids.
void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what);

/// Euclidean partial derivatives: centered in the interior, second-order one-sided on the boundary.
GridFunction partial1(const GridFunction& f);
GridFunction partial2(const GridFunction& f);

GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);

}  // namespace hmin

#endif  // HMIN_GRID_HPP
