#include "hmin/operators.hpp"

#include <cmath>
#include <vector>

#include "dual.hpp"

namespace hmin {

namespace {

using detail::Dual;
using detail::sqrt;
using std::sqrt;

// Gradient data on one cell face: u at the face, and the Euclidean derivatives of the field.
template <class T>
struct FaceGrad {
  T mid;
  T d1;
  T d2;
};

// V[a][b] holds the value at (i + a - 1, j + b - 1).
template <class T>
using Patch = std::array<std::array<T, 3>, 3>;

template <class T>
FaceGrad<T> east(const Patch<T>& V, double h1, double h2) {
  return {(V[1][1] + V[2][1]) * 0.5, (V[2][1] - V[1][1]) / h1,
          (V[1][2] - V[1][0] + V[2][2] - V[2][0]) / (4.0 * h2)};
}
template <class T>
FaceGrad<T> west(const Patch<T>& V, double h1, double h2) {
  return {(V[0][1] + V[1][1]) * 0.5, (V[1][1] - V[0][1]) / h1,
          (V[0][2] - V[0][0] + V[1][2] - V[1][0]) / (4.0 * h2)};
}
template <class T>
FaceGrad<T> north(const Patch<T>& V, double h1, double h2) {
  return {(V[1][1] + V[1][2]) * 0.5, (V[2][1] - V[0][1] + V[2][2] - V[0][2]) / (4.0 * h1),
          (V[1][2] - V[1][1]) / h2};
}
template <class T>
FaceGrad<T> south(const Patch<T>& V, double h1, double h2) {
  return {(V[1][0] + V[1][1]) * 0.5, (V[2][0] - V[0][0] + V[2][1] - V[0][1]) / (4.0 * h1),
          (V[1][1] - V[1][0]) / h2};
}

enum class FluxKind {
  kResidual,    // X_i u / W(grad u)
  kLinearized,  // a_ij / W X_j z
  kLagged,      // X_i z / W(grad u)
};

template <class R>
struct Flux {
  R f1;
  R f2;
};

// Flux on a face from the u-gradient g (which fixes the frame and the coefficients) and the
// z-gradient gz. For kResidual, gz is ignored.
template <FluxKind K, class TU, class TZ>
auto face_flux(const FaceGrad<TU>& g, const FaceGrad<TZ>& gz, double eps) {
  const auto p1 = g.d1 + g.mid * g.d2;
  const auto p2 = eps * g.d2;
  const auto w2 = 1.0 + p1 * p1 + p2 * p2;
  const auto w = sqrt(w2);
  if constexpr (K == FluxKind::kResidual) {
    return Flux<decltype(p1 / w)>{p1 / w, p2 / w};
  } else {
    const auto q1 = gz.d1 + g.mid * gz.d2;
    const auto q2 = eps * gz.d2;
    if constexpr (K == FluxKind::kLagged) {
      return Flux<decltype(q1 / w)>{q1 / w, q2 / w};
    } else {
      const auto a11 = 1.0 - p1 * p1 / w2;
      const auto a12 = -(p1 * p2) / w2;
      const auto a22 = 1.0 - p2 * p2 / w2;
      return Flux<decltype((a11 * q1 + a12 * q2) / w)>{(a11 * q1 + a12 * q2) / w, (a12 * q1 + a22 * q2) / w};
    }
  }
}

// sum_i X_i(flux_i) at the patch centre.
template <FluxKind K, class TU, class TZ>
auto node_value(const Patch<TU>& U, const Patch<TZ>& Z, double h1, double h2, double eps) {
  const auto fe = face_flux<K>(east(U, h1, h2), east(Z, h1, h2), eps);
  const auto fw = face_flux<K>(west(U, h1, h2), west(Z, h1, h2), eps);
  const auto fn = face_flux<K>(north(U, h1, h2), north(Z, h1, h2), eps);
  const auto fs = face_flux<K>(south(U, h1, h2), south(Z, h1, h2), eps);
  return (fe.f1 - fw.f1) / h1 + U[1][1] * (fn.f1 - fs.f1) / h2 + eps * (fn.f2 - fs.f2) / h2;
}

Patch<double> patch(const GridFunction& f, int i, int j) {
  Patch<double> P{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) P[a][b] = f(i + a - 1, j + b - 1);
  }
  return P;
}

template <int N>
Patch<Dual<N>> dual_patch(const GridFunction& f, int i, int j) {
  Patch<Dual<N>> P{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) P[a][b] = Dual<N>::variable(f(i + a - 1, j + b - 1), a + 3 * b);
  }
  return P;
}

template <FluxKind K>
GridFunction apply_flux_operator(const Frame& frame, const GridFunction& z) {
  const Grid& g = frame.grid();
  GridFunction out(g);
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) {
      out(i, j) = node_value<K>(patch(frame.u(), i, j), patch(z, i, j), g.h1(), g.h2(), frame.epsilon());
    }
  }
  return out;
}

}  // namespace

Coefficients coefficients_at(double p1, double p2) {
  const double w2 = 1.0 + p1 * p1 + p2 * p2;
  return {1.0 - p1 * p1 / w2, -p1 * p2 / w2, -p1 * p2 / w2, 1.0 - p2 * p2 / w2, std::sqrt(w2)};
}

CoefficientField coefficients(const Frame& frame) {
  const GridFunction p1 = apply_x1(frame, frame.u());
  const GridFunction p2 = apply_x2(frame, frame.u());
  const Grid& g = frame.grid();
  CoefficientField c{GridFunction(g), GridFunction(g), GridFunction(g), GridFunction(g), GridFunction(g)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Coefficients a = coefficients_at(p1.values()[k], p2.values()[k]);
    c.a11.values()[k] = a.a11;
    c.a12.values()[k] = a.a12;
    c.a21.values()[k] = a.a21;
    c.a22.values()[k] = a.a22;
    c.w.values()[k] = a.w;
  }
  return c;
}

Residual make_residual(GridFunction field, const IndexBox& region) {
  Residual r{std::move(field), region, 0.0, 0.0};
  const Grid& g = r.field.grid();
  double sum = 0.0;
  for (int j = region.j0; j <= region.j1; ++j) {
    for (int i = region.i0; i <= region.i1; ++i) {
      const double v = r.field(i, j);
      r.sup_norm = std::max(r.sup_norm, std::abs(v));
      sum += v * v;
    }
  }
  r.l2_norm = std::sqrt(sum * g.h1() * g.h2());
  return r;
}

Residual residual_div(const Frame& frame) {
  const Grid& g = frame.grid();
  GridFunction out(g);
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) {
      const Patch<double> U = patch(frame.u(), i, j);
      out(i, j) = node_value<FluxKind::kResidual>(U, U, g.h1(), g.h2(), frame.epsilon());
    }
  }
  return make_residual(std::move(out), g.interior(1));
}

Residual residual_nondiv(const Frame& frame) {
  const Grid& g = frame.grid();
  const double h1 = g.h1(), h2 = g.h2(), eps = frame.epsilon();
  GridFunction out(g);
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) {
      const Patch<double> U = patch(frame.u(), i, j);
      const double u = U[1][1];
      const double d1 = (U[2][1] - U[0][1]) / (2 * h1);
      const double d2 = (U[1][2] - U[1][0]) / (2 * h2);
      const double d11 = (U[2][1] - 2 * u + U[0][1]) / (h1 * h1);
      const double d22 = (U[1][2] - 2 * u + U[1][0]) / (h2 * h2);
      const double d12 = (U[2][2] - U[2][0] - U[0][2] + U[0][0]) / (4 * h1 * h2);
      const double x1u = d1 + u * d2;
      // X_i(X_j u), outer index first.
      const double x1x1 = d11 + 2 * u * d12 + u * u * d22 + d2 * x1u;
      const double x1x2 = eps * (d12 + u * d22);
      const double x2x1 = eps * (d12 + d2 * d2 + u * d22);
      const double x2x2 = eps * eps * d22;
      const Coefficients a = coefficients_at(x1u, eps * d2);
      out(i, j) = a.a11 * x1x1 + a.a12 * x1x2 + a.a21 * x2x1 + a.a22 * x2x2;
    }
  }
  return make_residual(std::move(out), g.interior(1));
}

GridFunction linearized_apply(const Frame& frame, const GridFunction& z) {
  require_same_grid(frame.u(), z, "linearized_apply");
  return apply_flux_operator<FluxKind::kLinearized>(frame, z);
}

GridFunction lagged_apply(const Frame& frame, const GridFunction& z) {
  require_same_grid(frame.u(), z, "lagged_apply");
  return apply_flux_operator<FluxKind::kLagged>(frame, z);
}

SparseMatrix jacobian_assemble(const Frame& frame) {
  const Grid& g = frame.grid();
  const InteriorIndex idx(g);
  SparseMatrix J(idx.size(), idx.size());
  J.reserve(Eigen::VectorXi::Constant(idx.size(), 9));
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) {
      const auto U = dual_patch<9>(frame.u(), i, j);
      const auto r = node_value<FluxKind::kResidual>(U, U, g.h1(), g.h2(), frame.epsilon());
      const int row = idx(i, j);
      for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
          const int ii = i + a - 1, jj = j + b - 1;
          if (g.is_boundary(ii, jj)) continue;
          J.insert(row, idx(ii, jj)) = r.d[static_cast<std::size_t>(a + 3 * b)];
        }
      }
    }
  }
  J.makeCompressed();
  return J;
}

SparseMatrix lagged_assemble(const Frame& frame) {
  const Grid& g = frame.grid();
  const InteriorIndex idx(g);
  SparseMatrix P(idx.size(), static_cast<Eigen::Index>(g.size()));
  P.reserve(Eigen::VectorXi::Constant(idx.size(), 9));
  for (int j = 1; j < g.n2() - 1; ++j) {
    for (int i = 1; i < g.n1() - 1; ++i) {
      const Patch<double> U = patch(frame.u(), i, j);
      const auto Z = dual_patch<9>(frame.u(), i, j);
      const auto r = node_value<FluxKind::kLagged>(U, Z, g.h1(), g.h2(), frame.epsilon());
      const int row = idx(i, j);
      for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
          P.insert(row, static_cast<Eigen::Index>(g.index(i + a - 1, j + b - 1))) =
              r.d[static_cast<std::size_t>(a + 3 * b)];
        }
      }
    }
  }
  P.makeCompressed();
  return P;
}

}  // namespace hmin
