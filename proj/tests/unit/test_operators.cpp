#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "hmin/examples.hpp"
#include "hmin/operators.hpp"

using namespace hmin;

namespace {

GridFunction smooth_field(const Grid& g) {
  return GridFunction::sample(g, [](Point p) { return std::sin(p.x1 + 0.5 * p.x2) + 0.3 * p.x2 * p.x2; });
}

Eigen::VectorXd interior_vector(const GridFunction& f) {
  const Grid& g = f.grid();
  const InteriorIndex idx(g);
  Eigen::VectorXd v(idx.size());
  for (int j = 1; j < g.n2() - 1; ++j)
    for (int i = 1; i < g.n1() - 1; ++i) v[idx(i, j)] = f(i, j);
  return v;
}

}  // namespace

TEST(Coefficients, HandValues) {
  Coefficients c = coefficients_at(0, 0);
  EXPECT_EQ(c.a11, 1.0);
  EXPECT_EQ(c.a12, 0.0);
  EXPECT_EQ(c.a22, 1.0);
  EXPECT_EQ(c.w, 1.0);
  c = coefficients_at(1, 0);
  EXPECT_DOUBLE_EQ(c.a11, 0.5);
  EXPECT_DOUBLE_EQ(c.a22, 1.0);
  EXPECT_DOUBLE_EQ(c.w, std::sqrt(2.0));
  c = coefficients_at(1, 1);
  EXPECT_DOUBLE_EQ(c.a11, 2.0 / 3);
  EXPECT_DOUBLE_EQ(c.a22, 2.0 / 3);
  EXPECT_DOUBLE_EQ(c.a12, -1.0 / 3);
  EXPECT_DOUBLE_EQ(c.a21, -1.0 / 3);
  EXPECT_DOUBLE_EQ(c.w, std::sqrt(3.0));
}

TEST(Coefficients, EigenvalueBoundsOnRandomGradients) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0, 3);
  for (int k = 0; k < 2000; ++k) {
    const double p1 = n(rng), p2 = n(rng);
    const Coefficients c = coefficients_at(p1, p2);
    EXPECT_EQ(c.a12, c.a21);
    EXPECT_GE(c.w, 1.0);
    Eigen::Matrix2d a;
    a << c.a11, c.a12, c.a21, c.a22;
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a).eigenvalues();
    const double lo = 1.0 / (1 + p1 * p1 + p2 * p2);
    EXPECT_GE(ev[0], lo * (1 - 1e-12));
    EXPECT_LE(ev[1], 1 + 1e-12);
  }
}

TEST(Residual, AffineIsZero) {
  const Grid g = Grid::unit_square(33);
  for (const double eps : {1.0, 0.3, 1e-3}) {
    const Frame f(eps, GridFunction::sample(g, [](Point p) { return -1.5 * p.x1 + 0.25; }));
    EXPECT_LE(residual_div(f).sup_norm, 1e-12);
    EXPECT_LE(residual_nondiv(f).sup_norm, 1e-12);
  }
}

TEST(Residual, LinearX2Value) {
  const Grid g({0, 2}, {0, 2}, 129, 129);
  const Frame f(1.0, GridFunction::sample(g, [](Point p) { return p.x2; }));
  const double h2 = g.h1() * g.h1();
  EXPECT_NEAR(residual_div(f).field(64, 64), 1 / std::pow(3.0, 1.5), 5 * h2);
  EXPECT_NEAR(residual_nondiv(f).field(64, 64), 1.0 / 3, 5 * h2);
}

TEST(Residual, PaulsUpperHalfPlane) {
  const Grid g({2, 3}, {0.1, 1}, 65, 65);
  const Frame f(1e-3, GridFunction::sample(g, pauls_graph));
  // eps^2 d2 terms remain; they are O(eps^2)
  EXPECT_LE(residual_div(f).sup_norm, 1e-3);
}

TEST(Residual, NormsOnInteriorOnly) {
  const Grid g = Grid::unit_square(17);
  const Residual r = residual_div(Frame(1.0, smooth_field(g)));
  EXPECT_EQ(r.field(0, 5), 0.0);
  EXPECT_EQ(r.field(16, 16), 0.0);
  EXPECT_GE(r.sup_norm, 0.0);
  EXPECT_GE(r.l2_norm, 0.0);
  EXPECT_EQ(r.region.i0, 1);
}

TEST(Residual, ShiftInvarianceForX2FreeU) {
  const Grid g = Grid::unit_square(33);
  const GridFunction u = GridFunction::sample(g, [](Point p) { return std::sin(2 * p.x1); });
  const Residual a = residual_div(Frame(0.5, u));
  const Residual b = residual_div(Frame(0.5, u + GridFunction(g, 3.0)));
  EXPECT_LE((a.field - b.field).sup_norm(), 1e-12);
}

TEST(Identity, WTimesDivMatchesNondiv) {
  double prev = 0;
  for (const int n : {33, 65}) {
    const Grid g = Grid::unit_square(n);
    const Frame f(0.5, smooth_field(g));
    const CoefficientField c = coefficients(f);
    const Residual d = residual_div(f), nd = residual_nondiv(f);
    double err = 0;
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) err = std::max(err, std::abs(c.w(i, j) * d.field(i, j) - nd.field(i, j)));
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 0.5);
    prev = err;
  }
}

TEST(Linearized, ConstantsAndLinearity) {
  const Grid g = Grid::unit_square(25);
  const Frame f(0.7, smooth_field(g));
  EXPECT_LE(linearized_apply(f, GridFunction(g, 2.0)).sup_norm(), 1e-12);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  GridFunction a(g), b(g);
  for (double& v : a.values()) v = n(rng);
  for (double& v : b.values()) v = n(rng);
  const GridFunction lhs = linearized_apply(f, 1.5 * a + (-0.5) * b);
  const GridFunction rhs = 1.5 * linearized_apply(f, a) + (-0.5) * linearized_apply(f, b);
  EXPECT_LE((lhs - rhs).sup_norm(), 1e-9 * lhs.sup_norm());
}

TEST(Linearized, FlatCaseIsLaplacian) {
  const Grid g = Grid::unit_square(17);
  const Frame f(1.0, GridFunction(g));
  const GridFunction m = linearized_apply(f, GridFunction::sample(g, [](Point p) { return p.x1 * p.x1; }));
  for (int j = 1; j < 16; ++j)
    for (int i = 1; i < 16; ++i) EXPECT_NEAR(m(i, j), 2.0, 1e-10);
}

TEST(Lagged, ReproducesResidualAtU) {
  const Grid g = Grid::unit_square(21);
  const Frame f(0.3, smooth_field(g));
  EXPECT_LE((lagged_apply(f, f.u()) - residual_div(f).field).sup_norm(), 1e-12);
  // assembled matrix agrees with the matrix-free form
  const SparseMatrix p = lagged_assemble(f);
  const Eigen::Map<const Eigen::VectorXd> all(f.u().values().data(), static_cast<Eigen::Index>(g.size()));
  const Eigen::VectorXd pu = p * all;
  EXPECT_LE((pu - interior_vector(residual_div(f).field)).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Jacobian, MatchesCentralDifferences) {
  const Grid g({0, 1}, {0, 1}, 17, 19);
  const Frame f(0.4, smooth_field(g));
  const SparseMatrix J = jacobian_assemble(f);
  for (int r = 0; r < J.outerSize(); ++r) EXPECT_LE(J.innerVector(r).nonZeros(), 9);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  for (int k = 0; k < 10; ++k) {
    GridFunction dir(g);
    for (int j = 1; j < g.n2() - 1; ++j)
      for (int i = 1; i < g.n1() - 1; ++i) dir(i, j) = n(rng);
    const double t = 1e-6;
    const Residual rp = residual_div(Frame(0.4, f.u() + t * dir));
    const Residual rm = residual_div(Frame(0.4, f.u() + (-t) * dir));
    const Eigen::VectorXd fd = (interior_vector(rp.field) - interior_vector(rm.field)) / (2 * t);
    const Eigen::VectorXd jv = J * interior_vector(dir);
    EXPECT_LE((jv - fd).norm() / jv.norm(), 1e-6);
  }
}
