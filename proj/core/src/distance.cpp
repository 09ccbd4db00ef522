#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hmin/geometry.hpp"

namespace hmin {

OracleBox default_oracle_box(const FrozenFrame& ff, LiftedPoint p, double delta) {
  const double rho = std::max(dist_surrogate_eps(ff, p), 2 * delta);
  const double d1 = std::abs(p.x.x1 - ff.x0.x1);
  const double w = (p.x.x2 - ff.x0.x2) - ff.u0 * (p.x.x1 - ff.x0.x1);
  const double g1 = std::abs(ff.x1u0 - ff.u0 * ff.x2u0 / ff.epsilon);
  const double g2 = std::abs(ff.x2u0 / ff.epsilon);
  OracleBox box;
  box.x1_half = 1.25 * std::max(d1, rho) + 3 * delta;
  box.s_half = std::min(0.999, 1.25 * std::max(std::abs(p.s), rho) + 3 * delta);
  // Drift of w while moving along X1 inside the box, plus room for X2 moves.
  const double r = std::max(box.x1_half, box.s_half);
  box.w_half = std::abs(w) + 1.25 * ff.epsilon * rho + r * ((g1 + g2) * r + r * r) + 3 * delta * delta;
  return box;
}

double dist_oracle(const FrozenFrame& ff, LiftedPoint p, double delta, std::optional<OracleBox> box_opt) {
  if (!(delta > 0.0)) throw std::invalid_argument("dist_oracle: delta must be positive");
  if (!(std::abs(p.s) < 1.0)) throw std::invalid_argument("dist_oracle: lifted point must have |s| < 1");
  const OracleBox box = box_opt ? *box_opt : default_oracle_box(ff, p, delta);

  // x1 and s live on the delta lattice; w = x2 - x0_2 - u0 (x1 - x0_1) on a finer lattice of step
  // eta = eps delta / m with eta ~ delta^2, so X2 moves are exact lattice moves of m cells.
  const double eps = ff.epsilon;
  const int m = std::max(1, static_cast<int>(std::lround(eps / delta)));
  const double eta = eps * delta / m;

  const int A = static_cast<int>(std::ceil(box.x1_half / delta));
  const int C = static_cast<int>(std::ceil(box.s_half / delta));
  const int B = static_cast<int>(std::ceil(box.w_half / eta));
  const std::int64_t na = 2 * A + 1, nb = 2 * static_cast<std::int64_t>(B) + 1, nc = 2 * C + 1;
  const std::int64_t total = na * nb * nc;
  if (total > 60'000'000) {
    throw std::invalid_argument("dist_oracle: search box too large for lattice step");
  }

  const double dx1 = p.x.x1 - ff.x0.x1;
  const double w_target = (p.x.x2 - ff.x0.x2) - ff.u0 * dx1;
  const int ta = static_cast<int>(std::lround(dx1 / delta));
  const int tc = static_cast<int>(std::lround(p.s / delta));
  const std::int64_t tb = std::llround(w_target / eta);
  if (std::abs(ta) > A || std::abs(tc) > C || std::llabs(tb) > B) {
    throw std::runtime_error("dist_oracle: target outside search box");
  }

  auto index = [&](std::int64_t a, std::int64_t b, std::int64_t c) {
    return ((a + A) * nc + (c + C)) * nb + (b + B);
  };

  // P1 - u0 on the lattice, written in (x1 offset, w) so the u0 shear cancels.
  const double g2 = ff.x2u0 / eps;
  const double g1 = ff.x1u0 - ff.u0 * g2;
  auto drift = [&](double x1_off, double w, double s) { return g1 * x1_off + g2 * (w + ff.u0 * x1_off) + s * s; };

  // Nodes in the target's (x1, s) fiber finish exactly: a partial X1 step, a partial X3 step, then
  // an X2 segment to the target height. Each is an admissible path, so every candidate bounds the
  // control distance from above (up to the Euler error of the X1 steps).
  const double frac_a = dx1 - ta * delta;
  const double frac_c = p.s - tc * delta;
  auto finish = [&](std::int64_t b) {
    double w = static_cast<double>(b) * eta;
    w += frac_a * drift(ta * delta, w, tc * delta);
    return std::abs(frac_a) + std::abs(frac_c) + std::abs(w - w_target) / eps;
  };

  // Every edge weighs delta, so Dijkstra's settle order is breadth-first order; hop counts suffice.
  constexpr std::int32_t kUnseen = -1;
  std::vector<std::int32_t> hops(static_cast<std::size_t>(total), kUnseen);
  std::vector<std::int64_t> frontier{index(0, 0, 0)};
  std::vector<std::int64_t> next;
  hops[static_cast<std::size_t>(frontier.front())] = 0;
  double best = std::numeric_limits<double>::infinity();

  for (std::int32_t level = 0; !frontier.empty() && level * delta < best; ++level) {
    next.clear();
    for (const std::int64_t id : frontier) {
      const std::int64_t b = id % nb - B;
      const std::int64_t ac = id / nb;
      const std::int64_t c = ac % nc - C;
      const std::int64_t a = ac / nc - A;
      if (a == ta && c == tc) best = std::min(best, level * delta + finish(b));

      auto relax = [&](std::int64_t a2, std::int64_t b2, std::int64_t c2) {
        if (std::llabs(a2) > A || std::llabs(b2) > B || std::llabs(c2) > C) return;
        const std::int64_t j = index(a2, b2, c2);
        auto& slot = hops[static_cast<std::size_t>(j)];
        if (slot == kUnseen) {
          slot = level + 1;
          next.push_back(j);
        }
      };

      // X1: dx1 = +-delta, dx2 = +-delta (P1 + s^2); in w this is +-delta (P1 - u0 + s^2).
      const double x1_off = static_cast<double>(a) * delta;
      const double w = static_cast<double>(b) * eta;
      const double s = static_cast<double>(c) * delta;
      const std::int64_t step_b = std::llround(delta * drift(x1_off, w, s) / eta);
      relax(a + 1, b + step_b, c);
      relax(a - 1, b - step_b, c);
      // X2: dx2 = +-eps delta.
      relax(a, b + m, c);
      relax(a, b - m, c);
      // X3: ds = +-delta.
      relax(a, b, c + 1);
      relax(a, b, c - 1);
    }
    frontier.swap(next);
  }
  if (std::isfinite(best)) return best;
  throw std::runtime_error("dist_oracle: target unreachable inside search box");
}

}  // namespace hmin
