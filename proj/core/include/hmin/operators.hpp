#ifndef HMIN_OPERATORS_HPP
#define HMIN_OPERATORS_HPP

#include <Eigen/SparseCore>

#include "hmin/geometry.hpp"
#include "hmin/grid.hpp"

namespace hmin {

/// a_ij(p) = delta_ij - p_i p_j / (1 + |p|^2) at p = grad_eps u, and W = sqrt(1 + |p|^2).
struct CoefficientField {
  GridFunction a11, a12, a21, a22;
  GridFunction w;
};

/// a_ij and W at a single gradient value.
struct Coefficients {
  double a11, a12, a21, a22, w;
};
Coefficients coefficients_at(double p1, double p2);

CoefficientField coefficients(const Frame& frame);

/// A residual field on the interior nodes (zero on the boundary).
/// l2_norm is the discrete L2 norm sqrt(h1 h2 sum r^2) over `region`.
struct Residual {
  GridFunction field;
  IndexBox region;
  double sup_norm = 0.0;
  double l2_norm = 0.0;
};

Residual make_residual(GridFunction field, const IndexBox& region);

/// L_eps u = sum_i X_i(X_i u / W) in conservative flux form: fluxes live on the cell faces
/// (i +- 1/2, j) and (i, j +- 1/2), giving a 9-point stencil.
Residual residual_div(const Frame& frame);

/// N_eps u = sum_ij a_ij X_i(X_j u) with compact second differences.
Residual residual_nondiv(const Frame& frame);

/// M_eps z = sum_ij X_i(a_ij / W X_j z), same face staggering as residual_div. Interior nodes only.
GridFunction linearized_apply(const Frame& frame, const GridFunction& z);

/// P_u z = sum_i X_i(X_i z / W), coefficients and X_1 lagged at u. P_u u = L_eps u.
GridFunction lagged_apply(const Frame& frame, const GridFunction& z);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Numbering of interior nodes: k = (j - 1)(n1 - 2) + (i - 1).
struct InteriorIndex {
  explicit InteriorIndex(const Grid& g) : n1(g.n1()), n2(g.n2()) {}
  int n1, n2;
  int size() const { return (n1 - 2) * (n2 - 2); }
  int operator()(int i, int j) const { return (j - 1) * (n1 - 2) + (i - 1); }
};

/// Exact Jacobian of residual_div with respect to the interior values of u, including the
/// dependence of X_1 on u. Square, interior x interior, at most 9 nonzeros per row.
SparseMatrix jacobian_assemble(const Frame& frame);

/// Matrix of P_u: rows are interior nodes, columns are all grid nodes (storage index).
SparseMatrix lagged_assemble(const Frame& frame);

}  // namespace hmin

#endif  // HMIN_OPERATORS_HPP
