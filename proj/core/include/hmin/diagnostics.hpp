#ifndef HMIN_DIAGNOSTICS_HPP
#define HMIN_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "hmin/geometry.hpp"
#include "hmin/grid.hpp"
#include "hmin/solver.hpp"

namespace hmin {

/// A derived field together with the nodes on which it is valid.
struct DerivedField {
  GridFunction field;
  IndexBox valid;
};

/// X1^k u with the frame of u; each application retreats one node from the boundary.
/// Throws std::invalid_argument for k < 1 or when the valid region is empty.
DerivedField intrinsic_derivative(const GridFunction& u, int k);

struct HolderOptions {
  std::optional<IndexBox> region;    // defaults to all nodes
  std::size_t max_pairs = 1'000'000;  // beyond this, sample stratified by separation decade
  std::uint64_t seed = 0x5eed;
};

/// max |f(x) - f(y)| / |x - y|^alpha over node pairs with |x - y| in window.
/// Throws std::invalid_argument for alpha outside (0, 1) or an empty window.
double holder_seminorm(const GridFunction& f, double alpha, Interval window, const HolderOptions& opts = {});

/// Slope of log max|f(x) - f(y)| against log |x - y| over the distinct separations in window,
/// clamped to [0, 1]. Same pair set as holder_seminorm.
double holder_exponent(const GridFunction& f, Interval window, const HolderOptions& opts = {});

/// sum_{k <= m} || |grad_eps^k f| ||_{L^p} (midpoint rule) on the nodes at least m steps
/// from the boundary. With x1_only, only X1-strings are used.
double sobolev_norm_eps(const Frame& frame, const GridFunction& f, int m, double p, bool x1_only = false);
double sobolev_norm_eps(const Frame& frame, int m, double p);

/// Sup-norm defects of the equations satisfied by v = d2 u and z_k = X_k u, over nodes at
/// physical distance >= `margin` (and at least three steps) from the boundary.
struct DerivativeResiduals {
  double v = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double z() const { return std::max(z1, z2); }
};
DerivativeResiduals derivative_equation_residuals(const Frame& frame, double margin = 0.0);

struct HolderEntry {
  double alpha = 0.0;
  double seminorm = 0.0;
  bool pass = true;
};

struct NormLedgerRow {
  double eps = 0.0;
  double m_bound = 0.0;
  double w22 = 0.0;      // ||u||_{W^{2,2}_eps}
  double d2u_w12 = 0.0;  // ||d2 u||_{W^{1,2}_eps}
  double wmp = 0.0;      // ||u||_{W^{m,p}_eps}
  std::vector<HolderEntry> holder;  // seminorm of grad_eps u
};

struct DiagnosticsConfig {
  std::vector<double> alphas{0.25, 0.5, 0.75, 0.9};
  Interval holder_window{0.0, 0.0};  // empty: [h, 8h]
  double compact_margin = 0.1;       // physical distance of the monitored compact from the boundary
  int sobolev_m = 2;
  double sobolev_p = 4.0;
  HolderOptions holder_options{};
};

struct Budgets {
  double x2u_sup = 1e-2;
  double holder = 50.0;
  double v_residual = 1e-2;
  double z_residual = 1e-2;
  double lip_ratio = 2.0;
};

NormLedgerRow norm_ledger_row(const Frame& frame, const DiagnosticsConfig& config = {});
std::vector<NormLedgerRow> norm_ledger(const VanishingViscosityRun& run, const DiagnosticsConfig& config = {});

struct RegularityVerdict {
  double eps = 0.0;  // final eps of the run
  std::vector<HolderEntry> alpha_estimates;
  double alpha_exponent = 0.0;  // holder_exponent of grad_eps u
  double x2u_sup = 0.0;
  std::vector<double> x2u_trend;  // sup |X^2 u| per eps
  double v_equation_residual = 0.0;
  double z_equation_residual = 0.0;
  double lip_ratio = 1.0;  // max/min Lipschitz norm along the run
  std::optional<double> reference_gap;  // sup |u_final - reference|
  bool x2u_pass = true;
  bool residual_pass = true;
  bool uniformity_pass = true;
  bool all_pass = true;
};

/// Verdict on the final solution of a run. `reference`, when given, is compared to the final
/// solution in sup-norm.
RegularityVerdict verdict(const VanishingViscosityRun& run, const Budgets& budgets, const DiagnosticsConfig& config = {},
                          const std::optional<GridFunction>& reference = {});

}  // namespace hmin

#endif  // HMIN_DIAGNOSTICS_HPP
