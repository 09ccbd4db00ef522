#ifndef HMIN_SOLVER_HPP
#define HMIN_SOLVER_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmin/geometry.hpp"
#include "hmin/grid.hpp"

namespace hmin {

struct SolverConfig {
  double newton_tol = 1e-10;  // sup-norm of residual_div on interior nodes
  int max_newton_iters = 40;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int max_line_search = 30;
  bool picard_fallback = true;
  int max_picard_iters = 400;
  double linear_solver_tol = 1e-10;  // relative residual of each linear solve

  /// Throws std::invalid_argument on non-positive tolerances or caps.
  void validate() const;
};

/// eps_j = eps_start * eps_factor^j, clipped at eps_min, j = 0 .. steps-1.
struct EpsSchedule {
  double eps_start = 1.0;
  double eps_factor = 0.5;
  double eps_min = 1e-3;
  int steps = 11;

  void validate() const;
  std::vector<double> values() const;
};

using BoundaryFunction = std::function<double(Point)>;

/// One structured log record per nonlinear iteration.
struct IterationRecord {
  std::string phase;  // "newton" or "picard"
  int iteration = 0;
  double residual_sup = 0.0;
  double residual_l2 = 0.0;
  double damping = 1.0;  // accepted step length
};

using LogSink = std::function<void(const IterationRecord&)>;

struct SolveReport {
  double epsilon = 0.0;
  bool converged = false;
  int newton_iterations = 0;
  int picard_iterations = 0;
  double residual_sup = 0.0;
  std::vector<IterationRecord> history;
};

struct SolveResult {
  GridFunction u;
  SolveReport report;
};

/// Thrown when neither Newton nor the Picard fallback reach newton_tol. Carries the iterate
/// with the smallest residual seen.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, GridFunction best, SolveReport report)
      : std::runtime_error(what), best_(std::move(best)), report_(std::move(report)) {}
  const GridFunction& best() const { return best_; }
  const SolveReport& report() const { return report_; }
  double residual() const { return report_.residual_sup; }

 private:
  GridFunction best_;
  SolveReport report_;
};

/// Transfinite (Coons) interpolation of the boundary values; reproduces bilinear data exactly.
GridFunction boundary_extension(const Grid& grid, const BoundaryFunction& boundary);

/// Overwrites the boundary nodes of u with the boundary function.
void impose_boundary(GridFunction& u, const BoundaryFunction& boundary);

/// Damped Newton for the Dirichlet problem L_eps u = 0, with Picard fallback.
/// Without an initial guess the boundary extension is used.
SolveResult solve_eps(const Grid& grid, const BoundaryFunction& boundary, double eps, const SolverConfig& config,
                      const std::optional<GridFunction>& initial_guess = {}, const LogSink& log = {});

/// Lagged-coefficient fixed point u_{k+1} = solve(P_{u_k} w = 0). Stops when the update stagnates
/// below `tol` in sup-norm or after max_iters.
SolveResult picard_solve(const Grid& grid, const BoundaryFunction& boundary, double eps, double tol, int max_iters,
                         const std::optional<GridFunction>& initial_guess = {}, const LogSink& log = {});

/// M = ||u||_inf + ||grad_eps u||_inf + ||d2 u||_inf.
double m_bound(const Frame& frame);

struct VanishingViscosityRun {
  EpsSchedule schedule;
  std::vector<double> eps;
  std::vector<GridFunction> solutions;
  std::vector<double> lipschitz_norms;  // GridFunction::lip_norm of each solution
  std::vector<double> m_bounds;
  std::vector<SolveReport> reports;
};

/// Solves along the schedule, warm-starting each eps from the previous solution.
/// A NonConvergence is rethrown with the failing eps in its message.
VanishingViscosityRun continuation(const Grid& grid, const BoundaryFunction& boundary, const EpsSchedule& schedule,
                                   const SolverConfig& config, const LogSink& log = {});

}  // namespace hmin

#endif  // HMIN_SOLVER_HPP
