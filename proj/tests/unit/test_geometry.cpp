#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hmin/examples.hpp"
#include "hmin/geometry.hpp"

using namespace hmin;

namespace {

GridFunction sample(const Grid& g, double (*f)(Point)) { return GridFunction::sample(g, f); }

}  // namespace

TEST(Frame, AnnihilatesConstants) {
  const Grid g({2, 3}, {-1, 1}, 17, 33);
  const Frame f(0.3, GridFunction::sample(g, pauls_graph));
  const GridFunction c(g, 5.0);
  EXPECT_EQ(apply_x1(f, c).sup_norm(), 0.0);
  EXPECT_EQ(apply_x2(f, c).sup_norm(), 0.0);
}

TEST(Frame, X1OfX2WithLinearU) {
  const Grid g = Grid::unit_square(9);
  const Frame f(1.0, sample(g, [](Point p) { return p.x1; }));
  const GridFunction r = apply_x1(f, sample(g, [](Point p) { return p.x2; }));
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) EXPECT_NEAR(r(i, j), g.x1(i), 1e-14);
}

TEST(Frame, PaulsIsLeafwiseConstant) {
  const Grid g({2, 3}, {-1, 1}, 65, 129);
  const GridFunction u = GridFunction::sample(g, pauls_graph);
  const GridFunction x1u = apply_x1(Frame(1.0, u), u);
  const double h = g.h1();
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i)
      if (std::abs(g.x2(j)) >= 0.1) EXPECT_LE(std::abs(x1u(i, j)), 10 * h * h);
}

TEST(Frame, X2Values) {
  const Grid g({0, 3}, {0, 3}, 61, 61);
  const GridFunction lin = apply_x2(Frame(0.5, GridFunction(g)), sample(g, [](Point p) { return p.x2; }));
  EXPECT_NEAR(lin.min(), 0.5, 1e-14);
  EXPECT_NEAR(lin.max(), 0.5, 1e-14);
  const GridFunction sq = apply_x2(Frame(1.0, GridFunction(g)), sample(g, [](Point p) { return p.x2 * p.x2; }));
  EXPECT_NEAR(sq(10, 40), 4.0, 1e-10);  // x2 = 2
}

TEST(Frame, LinearInF) {
  const Grid g({0, 1}, {0, 1}, 21, 17);
  const Frame f(0.4, sample(g, [](Point p) { return std::sin(3 * p.x1) * p.x2; }));
  const GridFunction a = sample(g, [](Point p) { return std::exp(p.x1 - p.x2); });
  const GridFunction b = sample(g, [](Point p) { return p.x1 * p.x1 * p.x2; });
  const GridFunction lhs = apply_x1(f, 2.0 * a + (-3.0) * b);
  const GridFunction rhs = 2.0 * apply_x1(f, a) + (-3.0) * apply_x1(f, b);
  EXPECT_LE((lhs - rhs).sup_norm(), 1e-12);
  EXPECT_THROW(apply_x1(f, GridFunction(Grid::unit_square(5))), std::invalid_argument);
}

TEST(Lifted, BracketsOnCoordinates) {
  const Grid g = Grid::unit_square(33);
  const Frame f(0.5, sample(g, [](Point p) { return p.x1 * p.x2 + 0.2; }));
  const LiftedFrame lf(f);
  const ScalarField3 x2 = [](LiftedPoint p) { return p.x.x2; };
  const double h = 1e-4;
  EXPECT_NEAR(apply_bracket(lf.field(1), lf.field(3), x2, {{0.5, 0.5}, 0.0}, h), 0.0, 1e-6);
  const VectorField3 b13 = [&](LiftedPoint p) { return lf.bracket13(p); };
  for (const double s : {-0.5, 0.0, 0.3}) {
    EXPECT_NEAR(apply_bracket(lf.field(3), lf.field(1), x2, {{0.4, 0.6}, s}, h) * -1.0,
                apply_vector(lf.bracket13({{0.4, 0.6}, s}), x2, {{0.4, 0.6}, s}, h), 1e-5);
    EXPECT_NEAR(apply_bracket(lf.field(3), b13, x2, {{0.4, 0.6}, s}, h), -2.0, 1e-5);
    EXPECT_DOUBLE_EQ(lf.bracket3_13({{0.4, 0.6}, s}).c2, -2.0);
  }
}

TEST(Lifted, X1AtZeroSMatchesFrame) {
  const Grid g = Grid::unit_square(33);
  const GridFunction u = sample(g, [](Point p) { return p.x1 - p.x2; });  // bilinear: interpolation exact
  const Frame frame(1.0, u);
  const LiftedFrame lf(frame);
  const ScalarField3 f = [](LiftedPoint p) { return std::sin(p.x.x1) * p.x.x2 * p.x.x2 + p.s; };
  for (const Point x : {Point{0.3, 0.3}, Point{0.5, 0.75}}) {
    const double expected = std::cos(x.x1) * x.x2 * x.x2 + (x.x1 - x.x2) * 2 * std::sin(x.x1) * x.x2;
    EXPECT_NEAR(apply_field(lf.field(1), f, {x, 0.0}, 1e-5), expected, 1e-8);
  }
}

// [X1~, X3~] f = -2 s d2 f with O(h^2) error of nested differences.
TEST(Lifted, CommutatorIdentityConverges) {
  const Grid g = Grid::unit_square(17);
  const Frame frame(1.0, sample(g, [](Point p) { return 0.5 * p.x1 + p.x2; }));
  const LiftedFrame lf(frame);
  const ScalarField3 f = [](LiftedPoint p) { return p.x.x2 * p.x.x2 * p.x.x2 + p.x.x1 * p.x.x2 * p.s; };
  const LiftedPoint p{{0.4, 0.6}, 0.4};
  const double exact = -2 * p.s * (3 * p.x.x2 * p.x.x2 + p.x.x1 * p.s);
  const double e1 = std::abs(apply_bracket(lf.field(1), lf.field(3), f, p, 2e-2) - exact);
  const double e2 = std::abs(apply_bracket(lf.field(1), lf.field(3), f, p, 1e-2) - exact);
  EXPECT_LT(e2, 1e-3);
  if (e1 > 1e-10) EXPECT_NEAR(e1 / e2, 4.0, 0.6);
}

TEST(ExpCoords, BasePointAndFlatU) {
  const Grid g({0, 2}, {0, 2}, 21, 21);
  const Frame zero(0.25, GridFunction(g));
  const Point x0{1, 1};
  const ExpCoords b = exp_coords_lifted(zero, x0, {x0, 0.0});
  EXPECT_EQ(b.e1, 0.0);
  EXPECT_EQ(b.e2, 0.0);
  EXPECT_EQ(b.e3, 0.0);
  const ExpCoords e = exp_coords_lifted(zero, x0, {{1.3, 0.8}, 0.0});
  EXPECT_NEAR(e.e1, 0.3, 1e-15);
  EXPECT_NEAR(e.e2, -0.2 / 0.25, 1e-12);
  EXPECT_EQ(e.e3, 0.0);
}

TEST(ExpCoords, LinearUMatchesClosedForm) {
  const Grid g({0, 2}, {0, 4}, 41, 41);
  const double eps = 0.5;
  const Frame f(eps, sample(g, [](Point p) { return p.x1; }));
  const Point x0{1, 2};
  for (const auto [a, b] : {std::pair{0.3, 0.2}, std::pair{-0.4, 0.1}, std::pair{0.5, -0.6}}) {
    const ExpCoords e = exp_coords_lifted(f, x0, {{x0.x1 + a, x0.x2 + b}, 0.0});
    // the path integral of u = x1 along x1 = x0_1 + a tau is x0_1 + a/2
    EXPECT_NEAR(e.e2, (b - a * (x0.x1 + a / 2)) / eps, 1e-10);
  }
  EXPECT_THROW(exp_coords_lifted(f, x0, {{1.5, 3.99}, 0.0}), std::out_of_range);
}

TEST(Taylor, AffineReproducedExactly) {
  const Grid g({0, 2}, {0, 2}, 21, 21);
  auto u = [](Point p) { return 0.7 * p.x1 - 1.3 * p.x2 + 0.4; };
  const Frame f(0.3, GridFunction::sample(g, u));
  const FrozenFrame ff = taylor_p1(f, g.node(7, 12));
  EXPECT_EQ(eval_p1(ff, ff.x0), u(ff.x0));
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) EXPECT_NEAR(eval_p1(ff, g.node(i, j)), u(g.node(i, j)), 1e-13);
  EXPECT_THROW(taylor_p1(f, g.node(0, 3)), std::invalid_argument);
  EXPECT_THROW(taylor_p1(f, {0.55, 1.0}), std::invalid_argument);
}

TEST(Taylor, ProductOracle) {
  const Grid g({0, 2}, {0, 2}, 21, 21);
  const double eps = 0.5;
  const Frame f(eps, sample(g, [](Point p) { return p.x1 * p.x2; }));
  const FrozenFrame ff = taylor_p1(f, {1, 1});
  // u0 = 1, X1 u = x2 + x1 x2 x1 = 2, X2 u = eps x1; e1 = 0.1, eps e2 = 0.05 - 0.1
  EXPECT_NEAR(eval_p1(ff, {1.1, 1.05}), 1.0 + 0.1 * 2.0 + (-0.05 / eps) * eps, 1e-12);
}

TEST(Surrogates, VanishAtBaseAndSymmetricInS) {
  const Grid g({0, 2}, {0, 2}, 21, 21);
  const FrozenFrame ff = taylor_p1(Frame(0.2, GridFunction(g)), {1, 1});
  EXPECT_EQ(dist_surrogate_eps(ff, {ff.x0, 0.0}), 0.0);
  EXPECT_EQ(dist_surrogate_cc(ff, {ff.x0, 0.0}), 0.0);
  for (const double s : {0.1, 0.35}) {
    const Point x{1.2, 0.9};
    EXPECT_NEAR(dist_surrogate_eps(ff, {x, s}), dist_surrogate_eps(ff, {x, -s}), 1e-12);
    EXPECT_NEAR(dist_surrogate_cc(ff, {x, s}), dist_surrogate_cc(ff, {x, -s}), 1e-12);
  }
}

TEST(Surrogates, RatioBoundedAcrossEps) {
  const Grid g({2, 3}, {-1, 1}, 33, 65);
  const GridFunction u = GridFunction::sample(g, logcosh_benchmark().eval);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  double lo = 1e300, hi = 0;
  for (const double eps : {1.0, 0.5, 0.2, 0.05}) {
    const FrozenFrame ff = taylor_p1(Frame(eps, u), g.node(16, 40));
    for (int k = 0; k < 20; ++k) {
      const LiftedPoint p{{ff.x0.x1 + 0.1 * U(rng), ff.x0.x2 + 0.1 * U(rng)}, 0.2 * U(rng)};
      const double r = dist_surrogate_eps(ff, p) / dist_surrogate_cc(ff, p);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  EXPECT_GT(lo, 1.0 / 10);
  EXPECT_LT(hi, 10.0);
}

TEST(Oracle, TrivialDistances) {
  const Grid g({0, 1}, {0, 1}, 11, 11);
  const FrozenFrame ff = taylor_p1(Frame(0.4, GridFunction::sample(g, [](Point p) { return p.x1 - 0.5; })),
                                   {0.5, 0.5});
  EXPECT_EQ(dist_oracle(ff, {ff.x0, 0.0}, 0.01), 0.0);
  EXPECT_NEAR(dist_oracle(ff, {ff.x0, 0.3}, 0.01), 0.3, 0.01 + 1e-12);
  EXPECT_NEAR(dist_oracle(ff, {ff.x0, -0.25}, 0.01), 0.25, 0.01 + 1e-12);
}

TEST(Oracle, MonotoneUnderRefinementUpToDelta) {
  const Grid g({2, 3}, {-1, 1}, 33, 65);
  const FrozenFrame ff = taylor_p1(Frame(0.4, GridFunction::sample(g, logcosh_benchmark().eval)), g.node(16, 40));
  for (const auto& [d1, w, s] : {std::tuple{0.08, 0.0032, 0.04}, std::tuple{-0.04, -0.0048, 0.12},
                                 std::tuple{0.12, 0.0, -0.08}}) {
    const LiftedPoint p{{ff.x0.x1 + d1, ff.x0.x2 + ff.u0 * d1 + w}, s};
    const double a = dist_oracle(ff, p, 0.04), b = dist_oracle(ff, p, 0.02), c = dist_oracle(ff, p, 0.01);
    EXPECT_LE(b, a + 0.02 + 1e-12);
    EXPECT_LE(c, b + 0.01 + 1e-12);
    const double se = dist_surrogate_eps(ff, p);
    EXPECT_GT(c / se, 0.2);
    EXPECT_LT(c / se, 5.0);
  }
}

TEST(TaylorRemainder, Exponents) {
  const std::vector<double> radii{0.05, 0.1, 0.15, 0.2};
  const Grid g({0, 1}, {0, 1}, 65, 65);
  const Frame affine(0.5, GridFunction::sample(g, [](Point p) { return 2 * p.x1 - p.x2; }));
  EXPECT_TRUE(std::isinf(taylor_remainder_exponent(affine, g.node(32, 32), radii)));

  const Frame sq(0.5, GridFunction::sample(g, [](Point p) { return p.x1 * p.x1; }));
  EXPECT_GE(taylor_remainder_exponent(sq, g.node(32, 32), radii), 1.9);

  const Grid pg({2, 3}, {-1, 1}, 65, 129);
  const Frame pauls(0.5, GridFunction::sample(pg, pauls_graph));
  EXPECT_GE(taylor_remainder_exponent(pauls, pg.node(32, 100), radii), 1.9);

  const std::vector<double> tiny{1e-9};
  EXPECT_THROW(taylor_remainder_exponent(sq, g.node(32, 32), tiny), std::invalid_argument);
}
