#include "hmin/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hmin/operators.hpp"

namespace hmin {

namespace {

using Vector = Eigen::VectorXd;
using ColMatrix = Eigen::SparseMatrix<double>;

Vector to_interior(const GridFunction& f) {
  const Grid& g = f.grid();
  const InteriorIndex idx(g);
  Vector v(idx.size());
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) v[idx(i, j)] = f(i, j);
  }
  return v;
}

void add_interior(GridFunction& f, const Vector& v, double scale) {
  const Grid& g = f.grid();
  const InteriorIndex idx(g);
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) f(i, j) += scale * v[idx(i, j)];
  }
}

// Solves A x = b with a sparse LU and a few steps of iterative refinement.
Vector linear_solve(const ColMatrix& A, const Vector& b, double rel_tol) {
  Eigen::SparseLU<ColMatrix> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("linear solve: factorization failed");
  Vector x = lu.solve(b);
  const double bnorm = std::max(b.norm(), std::numeric_limits<double>::min());
  for (int k = 0; k < 3; ++k) {
    const Vector r = b - A * x;
    if (r.norm() <= rel_tol * bnorm) break;
    x += lu.solve(r);
  }
  if (!x.allFinite()) throw std::runtime_error("linear solve: non-finite solution");
  return x;
}

struct State {
  GridFunction u;
  Residual r;
};

State evaluate(GridFunction u, double eps) {
  Residual r = residual_div(Frame(eps, u));
  return {std::move(u), std::move(r)};
}

class NewtonDriver {
 public:
  NewtonDriver(double eps, const SolverConfig& config, const LogSink& log, SolveReport& report)
      : eps_(eps), config_(config), log_(log), report_(report) {}

  // Runs damped Newton from `s`. Returns true on convergence; `s` holds the last accepted iterate.
  bool run(State& s, int min_steps) {
    for (int k = 0; k < config_.max_newton_iters; ++k) {
      if (k >= min_steps && s.r.sup_norm <= config_.newton_tol) return true;
      const ColMatrix J = jacobian_assemble(Frame(eps_, s.u));
      const Vector rhs = -to_interior(s.r.field);
      Vector delta;
      try {
        delta = linear_solve(J, rhs, config_.linear_solver_tol);
      } catch (const std::runtime_error&) {
        return false;
      }

      const double r0 = s.r.l2_norm;
      double lambda = 1.0;
      bool accepted = false;
      for (int ls = 0; ls <= config_.max_line_search; ++ls) {
        GridFunction trial = s.u;
        add_interior(trial, delta, lambda);
        State t = evaluate(std::move(trial), eps_);
        if (std::isfinite(t.r.l2_norm) && t.r.l2_norm <= (1.0 - config_.armijo_c * lambda) * r0) {
          s = std::move(t);
          accepted = true;
          break;
        }
        // Full steps at round-off level cannot satisfy a strict decrease; accept them.
        if (ls == 0 && t.r.sup_norm <= config_.newton_tol && std::isfinite(t.r.sup_norm)) {
          s = std::move(t);
          accepted = true;
          break;
        }
        lambda *= config_.armijo_shrink;
      }
      if (!accepted) return false;
      ++report_.newton_iterations;
      record("newton", report_.newton_iterations, s.r, lambda);
    }
    return s.r.sup_norm <= config_.newton_tol;
  }

  void record(const char* phase, int iteration, const Residual& r, double damping) {
    IterationRecord rec{phase, iteration, r.sup_norm, r.l2_norm, damping};
    report_.history.push_back(rec);
    if (log_) log_(rec);
  }

 private:
  double eps_;
  const SolverConfig& config_;
  const LogSink& log_;
  SolveReport& report_;
};

// One lagged step: solve P_u w = 0 with w = u on the boundary.
GridFunction picard_step(const GridFunction& u, double eps) {
  const Grid& g = u.grid();
  const InteriorIndex idx(g);
  const SparseMatrix P = lagged_assemble(Frame(eps, u));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(P.nonZeros()));
  Vector rhs = Vector::Zero(idx.size());
  for (int row = 0; row < P.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(P, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      const int i = col % g.n1(), j = col / g.n1();
      if (g.is_boundary(i, j)) {
        rhs[row] -= it.value() * u(i, j);
      } else {
        trip.emplace_back(row, idx(i, j), it.value());
      }
    }
  }
  ColMatrix A(idx.size(), idx.size());
  A.setFromTriplets(trip.begin(), trip.end());
  const Vector w = linear_solve(A, rhs, 1e-12);
  GridFunction out = u;
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) out(i, j) = w[idx(i, j)];
  }
  return out;
}

GridFunction initial_state(const Grid& grid, const BoundaryFunction& boundary,
                           const std::optional<GridFunction>& initial_guess) {
  GridFunction u = initial_guess ? *initial_guess : boundary_extension(grid, boundary);
  if (!(u.grid() == grid)) throw std::invalid_argument("solve_eps: initial guess lives on a different grid");
  impose_boundary(u, boundary);
  if (!u.all_finite()) throw std::invalid_argument("solve_eps: non-finite boundary or initial values");
  return u;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(newton_tol > 0) || !(linear_solver_tol > 0)) throw std::invalid_argument("solver: tolerances must be positive");
  if (max_newton_iters < 1 || max_line_search < 1 || max_picard_iters < 1) {
    throw std::invalid_argument("solver: iteration caps must be at least 1");
  }
  if (!(armijo_c > 0 && armijo_c < 1)) throw std::invalid_argument("solver: armijo_c must lie in (0, 1)");
  if (!(armijo_shrink > 0 && armijo_shrink < 1)) throw std::invalid_argument("solver: armijo_shrink must lie in (0, 1)");
}

void EpsSchedule::validate() const {
  if (!(eps_min > 0) || !(eps_start > eps_min)) throw std::invalid_argument("schedule: need eps_start > eps_min > 0");
  if (!(eps_factor > 0 && eps_factor < 1)) throw std::invalid_argument("schedule: eps_factor must lie in (0, 1)");
  if (steps < 1) throw std::invalid_argument("schedule: steps must be at least 1");
}

std::vector<double> EpsSchedule::values() const {
  validate();
  std::vector<double> out;
  double e = eps_start;
  for (int k = 0; k < steps; ++k) {
    out.push_back(std::max(e, eps_min));
    e *= eps_factor;
  }
  return out;
}

GridFunction boundary_extension(const Grid& grid, const BoundaryFunction& boundary) {
  const int n1 = grid.n1(), n2 = grid.n2();
  const double x0 = grid.x1(0), x1 = grid.x1(n1 - 1), y0 = grid.x2(0), y1 = grid.x2(n2 - 1);
  const double g00 = boundary({x0, y0}), g10 = boundary({x1, y0});
  const double g01 = boundary({x0, y1}), g11 = boundary({x1, y1});
  std::vector<double> left(n2), right(n2), bottom(n1), top(n1);
  for (int j = 0; j < n2; ++j) {
    left[j] = boundary({x0, grid.x2(j)});
    right[j] = boundary({x1, grid.x2(j)});
  }
  for (int i = 0; i < n1; ++i) {
    bottom[i] = boundary({grid.x1(i), y0});
    top[i] = boundary({grid.x1(i), y1});
  }
  GridFunction u(grid);
  for (int j = 0; j < n2; ++j) {
    const double b = static_cast<double>(j) / (n2 - 1);
    for (int i = 0; i < n1; ++i) {
      const double a = static_cast<double>(i) / (n1 - 1);
      u(i, j) = (1 - a) * left[j] + a * right[j] + (1 - b) * bottom[i] + b * top[i] -
                ((1 - a) * (1 - b) * g00 + a * (1 - b) * g10 + (1 - a) * b * g01 + a * b * g11);
    }
  }
  impose_boundary(u, boundary);
  return u;
}

void impose_boundary(GridFunction& u, const BoundaryFunction& boundary) {
  const Grid& g = u.grid();
  for (int j = 0; j < g.n2(); ++j) {
    for (int i = 0; i < g.n1(); ++i) {
      if (g.is_boundary(i, j)) u(i, j) = boundary(g.node(i, j));
    }
  }
}

SolveResult solve_eps(const Grid& grid, const BoundaryFunction& boundary, double eps, const SolverConfig& config,
                      const std::optional<GridFunction>& initial_guess, const LogSink& log) {
  if (!(eps > 0)) throw std::invalid_argument("solve_eps: eps must be positive");
  config.validate();

  SolveReport report;
  report.epsilon = eps;
  NewtonDriver newton(eps, config, log, report);
  State s = evaluate(initial_state(grid, boundary, initial_guess), eps);
  State best = s;

  bool ok = newton.run(s, 1);
  if (s.r.sup_norm < best.r.sup_norm) best = s;

  // Lagged iterations until the residual has dropped well below where Newton stalled, then
  // hand back to Newton. Two rounds at most.
  for (int round = 0; !ok && config.picard_fallback && round < 2; ++round) {
    const double entry = s.r.sup_norm;
    const int budget = config.max_picard_iters / 2;
    for (int k = 0; k < budget; ++k) {
      try {
        s = evaluate(picard_step(s.u, eps), eps);
      } catch (const std::runtime_error&) {
        break;
      }
      ++report.picard_iterations;
      newton.record("picard", report.picard_iterations, s.r, 1.0);
      if (!std::isfinite(s.r.sup_norm)) break;
      if (s.r.sup_norm < best.r.sup_norm) best = s;
      if (s.r.sup_norm <= config.newton_tol || s.r.sup_norm <= 1e-3 * entry) break;
    }
    s = best;
    ok = s.r.sup_norm <= config.newton_tol || newton.run(s, 0);
    if (s.r.sup_norm < best.r.sup_norm) best = s;
  }

  report.converged = ok;
  report.residual_sup = best.r.sup_norm;
  if (!ok) {
    std::ostringstream msg;
    msg << "solve_eps: no convergence at eps=" << eps << " (best residual " << best.r.sup_norm << ", tol "
        << config.newton_tol << ")";
    throw NonConvergence(msg.str(), std::move(best.u), std::move(report));
  }
  return {std::move(s.u), std::move(report)};
}

SolveResult picard_solve(const Grid& grid, const BoundaryFunction& boundary, double eps, double tol, int max_iters,
                         const std::optional<GridFunction>& initial_guess, const LogSink& log) {
  if (!(eps > 0)) throw std::invalid_argument("picard_solve: eps must be positive");
  SolveReport report;
  report.epsilon = eps;
  GridFunction u = initial_state(grid, boundary, initial_guess);
  for (int k = 1; k <= max_iters; ++k) {
    GridFunction next = picard_step(u, eps);
    const double change = (next - u).sup_norm();
    u = std::move(next);
    report.picard_iterations = k;
    const Residual r = residual_div(Frame(eps, u));
    IterationRecord rec{"picard", k, r.sup_norm, r.l2_norm, 1.0};
    report.history.push_back(rec);
    if (log) log(rec);
    report.residual_sup = r.sup_norm;
    if (change <= tol) {
      report.converged = true;
      break;
    }
  }
  return {std::move(u), std::move(report)};
}

double m_bound(const Frame& frame) {
  const GridFunction p1 = apply_x1(frame, frame.u());
  const GridFunction p2 = apply_x2(frame, frame.u());
  const GridFunction d2 = partial2(frame.u());
  double grad = 0.0;
  for (std::size_t k = 0; k < p1.values().size(); ++k) {
    grad = std::max(grad, std::hypot(p1.values()[k], p2.values()[k]));
  }
  return frame.u().sup_norm() + grad + d2.sup_norm();
}

VanishingViscosityRun continuation(const Grid& grid, const BoundaryFunction& boundary, const EpsSchedule& schedule,
                                   const SolverConfig& config, const LogSink& log) {
  VanishingViscosityRun run;
  run.schedule = schedule;
  std::optional<GridFunction> guess;
  for (const double eps : schedule.values()) {
    SolveResult res;
    try {
      res = solve_eps(grid, boundary, eps, config, guess, log);
    } catch (const NonConvergence& e) {
      std::ostringstream msg;
      msg << "continuation failed at eps=" << eps << ": " << e.what();
      throw NonConvergence(msg.str(), e.best(), e.report());
    }
    const Frame frame(eps, res.u);
    run.eps.push_back(eps);
    run.lipschitz_norms.push_back(res.u.lip_norm());
    run.m_bounds.push_back(m_bound(frame));
    run.reports.push_back(std::move(res.report));
    guess = res.u;
    run.solutions.push_back(std::move(res.u));
  }
  return run;
}

}  // namespace hmin
