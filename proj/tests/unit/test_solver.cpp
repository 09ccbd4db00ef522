#include <gtest/gtest.h>

#include <cmath>

#include "hmin/examples.hpp"
#include "hmin/operators.hpp"
#include "hmin/solver.hpp"

using namespace hmin;

TEST(Schedule, GeometricAndClipped) {
  EpsSchedule s;
  const auto v = s.values();
  ASSERT_EQ(v.size(), 11u);
  EXPECT_EQ(v.front(), 1.0);
  EXPECT_EQ(v[3], 0.125);
  EXPECT_EQ(v.back(), 1e-3);
  s.eps_min = 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {1.0, 1.5, 1e-3, 5};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.armijo_c = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.max_newton_iters = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(BoundaryExtension, ReproducesBilinear) {
  const Grid g({0, 2}, {-1, 1}, 13, 9);
  auto f = [](Point p) { return 1 + p.x1 - 2 * p.x2 + 0.5 * p.x1 * p.x2; };
  const GridFunction e = boundary_extension(g, f);
  EXPECT_LE((e - GridFunction::sample(g, f)).sup_norm(), 1e-14);
}

TEST(Solve, ConstantTakesOneStep) {
  const SolveResult r = solve_eps(Grid::unit_square(33), catalog_entry("constant").eval, 0.5, {});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.newton_iterations, 1);
  EXPECT_LE(std::abs(r.u.max() - 3.0), 1e-14);
}

TEST(Solve, AffineIsRecovered) {
  const Grid g = Grid::unit_square(65);
  const CatalogEntry e = catalog_entry("affine");
  for (const double eps : {1.0, 0.5, 0.1}) {
    const SolveResult r = solve_eps(g, e.eval, eps, {});
    EXPECT_LE(r.report.residual_sup, 1e-12);
    EXPECT_LE(r.report.newton_iterations, 3);
    EXPECT_LE((r.u - GridFunction::sample(g, e.eval)).sup_norm(), 1e-12);
  }
}

TEST(Solve, AgreesWithPicardOracle) {
  const Grid g = Grid::unit_square(33);
  auto bc = [](Point p) { return p.x2; };
  const SolveResult n = solve_eps(g, bc, 0.5, {});
  const SolveResult p = picard_solve(g, bc, 0.5, 1e-10, 2000);
  EXPECT_LE((n.u - p.u).sup_norm(), 1e-6);
  EXPECT_EQ(p.report.newton_iterations, 0);
}

TEST(Solve, BoundaryExactAndMaximumPrinciple) {
  const CatalogEntry e = logcosh_benchmark();
  const Grid g(e.x1_range, e.x2_range, 33, 33);
  SolverConfig cfg;
  const SolveResult r = solve_eps(g, e.eval, 0.25, cfg);
  const GridFunction b = GridFunction::sample(g, e.eval);
  double lo = 1e300, hi = -1e300;
  for (int j = 0; j < g.n2(); ++j) {
    for (int i = 0; i < g.n1(); ++i) {
      if (!g.is_boundary(i, j)) continue;
      EXPECT_EQ(r.u(i, j), b(i, j));
      lo = std::min(lo, b(i, j));
      hi = std::max(hi, b(i, j));
    }
  }
  const double tau = 10 * cfg.newton_tol;
  EXPECT_GE(r.u.min(), lo - tau);
  EXPECT_LE(r.u.max(), hi + tau);
  // re-evaluating the stored solution stays below tolerance
  EXPECT_LE(residual_div(Frame(0.25, r.u)).sup_norm, cfg.newton_tol);
}

TEST(Solve, QuadraticTail) {
  const CatalogEntry e = logcosh_benchmark();
  const Grid g(e.x1_range, e.x2_range, 33, 33);
  SolverConfig cfg;
  cfg.newton_tol = 1e-12;
  const SolveResult r = solve_eps(g, e.eval, 0.1, cfg);
  const auto& h = r.report.history;
  int checked = 0;
  for (std::size_t k = 1; k < h.size(); ++k) {
    const double a = h[k - 1].residual_sup, b = h[k].residual_sup;
    if (h[k].phase != "newton" || a > 1e-3 || a < 1e-9 || h[k].damping < 1) continue;
    EXPECT_LE(b, 100 * a * a) << "step " << k;
    ++checked;
  }
  EXPECT_GE(checked, 1);
}

TEST(Solve, NonConvergenceCarriesBestIterate) {
  const CatalogEntry e = logcosh_benchmark();
  const Grid g(e.x1_range, e.x2_range, 33, 33);
  SolverConfig cfg;
  cfg.newton_tol = 1e-15;
  cfg.max_newton_iters = 2;
  cfg.picard_fallback = false;
  try {
    solve_eps(g, e.eval, 1e-4, cfg);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& nc) {
    EXPECT_FALSE(nc.report().converged);
    EXPECT_TRUE(nc.best().all_finite());
    EXPECT_EQ(nc.best().grid(), g);
    EXPECT_NEAR(residual_div(Frame(1e-4, nc.best())).sup_norm, nc.residual(), 1e-15 + 1e-12 * nc.residual());
  }
}

TEST(Solve, LogsEveryIteration) {
  int calls = 0;
  const SolveResult r = solve_eps(Grid::unit_square(17), [](Point p) { return p.x2 * p.x1; }, 0.5, {}, {},
                                  [&](const IterationRecord& rec) {
                                    ++calls;
                                    EXPECT_FALSE(rec.phase.empty());
                                  });
  EXPECT_EQ(calls, static_cast<int>(r.report.history.size()));
}

TEST(Continuation, AffineStaysPut) {
  const Grid g = Grid::unit_square(33);
  const VanishingViscosityRun run = continuation(g, catalog_entry("affine").eval, {1.0, 0.5, 0.01, 6}, {});
  ASSERT_EQ(run.solutions.size(), 6u);
  for (const GridFunction& u : run.solutions) EXPECT_LE((u - run.solutions.front()).sup_norm(), 1e-12);
  for (const double l : run.lipschitz_norms) EXPECT_NEAR(l, run.lipschitz_norms.front(), 1e-10);
}

TEST(Continuation, WarmStartNeverCostsMore) {
  const CatalogEntry e = logcosh_benchmark();
  const Grid g(e.x1_range, e.x2_range, 33, 33);
  const SolverConfig cfg;
  const VanishingViscosityRun run = continuation(g, e.eval, {1.0, 0.5, 0.05, 5}, cfg);
  for (std::size_t k = 0; k < run.eps.size(); ++k) {
    const SolveResult cold = solve_eps(g, e.eval, run.eps[k], cfg);
    EXPECT_LE(run.reports[k].newton_iterations, cold.report.newton_iterations) << "eps " << run.eps[k];
    EXPECT_LE(residual_div(Frame(run.eps[k], run.solutions[k])).sup_norm, cfg.newton_tol);
    EXPECT_TRUE(std::isfinite(run.lipschitz_norms[k]));
  }
}

TEST(Continuation, FailureNamesEps) {
  const CatalogEntry e = logcosh_benchmark();
  SolverConfig cfg;
  cfg.newton_tol = 1e-16;
  cfg.max_newton_iters = 1;
  cfg.picard_fallback = false;
  try {
    continuation(Grid(e.x1_range, e.x2_range, 17, 17), e.eval, {0.5, 0.5, 0.1, 3}, cfg);
    FAIL();
  } catch (const NonConvergence& nc) {
    EXPECT_NE(std::string(nc.what()).find("eps=0.5"), std::string::npos) << nc.what();
  }
}
