#include "hmin/diagnostics.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>

#include "hmin/operators.hpp"

namespace hmin {

namespace {

IndexBox intersect(const IndexBox& a, const IndexBox& b) {
  return {std::max(a.i0, b.i0), std::min(a.i1, b.i1), std::max(a.j0, b.j0), std::min(a.j1, b.j1)};
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int decade_of(double d) { return static_cast<int>(std::floor(std::log10(d))); }

// Visits node pairs with separation in `window`. When the region holds more than max_pairs
// pairs, each separation decade keeps a share max_pairs / #decades. The keep rate of a decade
// is fixed by the region alone and every offset draws its own stream, so whether a pair is
// visited never depends on the window: widening the window only adds pairs.
template <class Visit>
void for_each_pair(const GridFunction& f, Interval window, const HolderOptions& opts, Visit&& visit) {
  const Grid& g = f.grid();
  const IndexBox box = opts.region ? intersect(*opts.region, g.interior(0)) : g.interior(0);
  if (box.empty()) throw std::invalid_argument("holder: empty region");
  if (!(window.hi >= window.lo) || !(window.hi > 0)) throw std::invalid_argument("holder: empty window");

  const int w = box.i1 - box.i0, hgt = box.j1 - box.j0;
  auto pairs_of = [&](int di, int dj) {
    return static_cast<std::size_t>(w - di + 1) * static_cast<std::size_t>(hgt - std::abs(dj) + 1);
  };

  // Pair counts per decade over the whole region.
  std::map<int, double> decade_total;
  std::size_t total = 0;
  for (int di = 0; di <= w; ++di) {
    for (int dj = -hgt; dj <= hgt; ++dj) {
      if (di == 0 && dj <= 0) continue;
      const std::size_t n = pairs_of(di, dj);
      decade_total[decade_of(std::hypot(di * g.h1(), dj * g.h2()))] += static_cast<double>(n);
      total += n;
    }
  }
  const bool sampled = total > opts.max_pairs;
  const double quota = static_cast<double>(opts.max_pairs) / static_cast<double>(std::max<std::size_t>(1, decade_total.size()));

  const int max_di = std::min(w, static_cast<int>(std::floor(window.hi / g.h1() + 1e-9)));
  const int max_dj = std::min(hgt, static_cast<int>(std::floor(window.hi / g.h2() + 1e-9)));
  bool any = false;
  for (int di = 0; di <= max_di; ++di) {
    for (int dj = -max_dj; dj <= max_dj; ++dj) {
      if (di == 0 && dj <= 0) continue;
      const double d = std::hypot(di * g.h1(), dj * g.h2());
      if (d < window.lo * (1 - 1e-12) || d > window.hi * (1 + 1e-12)) continue;
      any = true;
      const int ni = w - di + 1;
      const std::size_t count = pairs_of(di, dj);
      auto at = [&](std::size_t r) {
        const int i = box.i0 + static_cast<int>(r % static_cast<std::size_t>(ni));
        const int j = box.j0 + std::max(0, -dj) + static_cast<int>(r / static_cast<std::size_t>(ni));
        visit(d, std::abs(f(i + di, j + dj) - f(i, j)));
      };
      const double rate = sampled ? std::min(1.0, quota / decade_total[decade_of(d)]) : 1.0;
      if (rate >= 1.0) {
        for (std::size_t r = 0; r < count; ++r) at(r);
        continue;
      }
      // Bernoulli(rate) selection by geometric skips.
      const std::uint64_t key = (static_cast<std::uint64_t>(di) << 32) ^ static_cast<std::uint32_t>(dj);
      std::mt19937_64 rng(splitmix(opts.seed ^ splitmix(key)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double log_keep = std::log1p(-rate);
      double r = -1.0;
      while (true) {
        r += 1.0 + std::floor(std::log(1.0 - unit(rng)) / log_keep);
        if (r >= static_cast<double>(count)) break;
        at(static_cast<std::size_t>(r));
      }
    }
  }
  if (!any) throw std::invalid_argument("holder: no node pairs with separation in window");
}

GridFunction nodewise(const GridFunction& a, const GridFunction& b, double (*op)(double, double)) {
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = op(a.values()[k], b.values()[k]);
  return out;
}

double mul(double a, double b) { return a * b; }
double quot(double a, double b) { return a / b; }

GridFunction operator*(const GridFunction& a, const GridFunction& b) { return nodewise(a, b, mul); }
GridFunction operator/(const GridFunction& a, const GridFunction& b) { return nodewise(a, b, quot); }

IndexBox monitored(const Grid& g, double margin) { return g.compact(margin, 2); }

Interval default_window(const Grid& g, Interval w) {
  if (w.hi > 0) return w;
  const double h = std::max(g.h1(), g.h2());
  return {h, 8 * h};
}

double holder_of_gradient(const Frame& frame, double alpha, Interval window, const HolderOptions& opts) {
  const GridFunction p1 = apply_x1(frame, frame.u());
  const GridFunction p2 = apply_x2(frame, frame.u());
  return std::max(holder_seminorm(p1, alpha, window, opts), holder_seminorm(p2, alpha, window, opts));
}

}  // namespace

DerivedField intrinsic_derivative(const GridFunction& u, int k) {
  if (k < 1) throw std::invalid_argument("intrinsic_derivative: k must be at least 1");
  const IndexBox valid = u.grid().interior(k);
  if (valid.empty()) throw std::invalid_argument("intrinsic_derivative: no valid nodes left for this order");
  const Frame frame(1.0, u);
  GridFunction f = u;
  for (int r = 0; r < k; ++r) f = apply_x1(frame, f);
  return {std::move(f), valid};
}

double holder_seminorm(const GridFunction& f, double alpha, Interval window, const HolderOptions& opts) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("holder_seminorm: alpha must lie in (0, 1)");
  double best = 0.0;
  for_each_pair(f, window, opts, [&](double d, double df) { best = std::max(best, df / std::pow(d, alpha)); });
  return best;
}

double holder_exponent(const GridFunction& f, Interval window, const HolderOptions& opts) {
  std::map<long long, std::pair<double, double>> by_sep;  // key -> (d, max |df|)
  const double unit = std::min(f.grid().h1(), f.grid().h2()) * 1e-6;
  for_each_pair(f, window, opts, [&](double d, double df) {
    auto& slot = by_sep[std::llround(d / unit)];
    slot.first = d;
    slot.second = std::max(slot.second, df);
  });
  std::vector<std::pair<double, double>> pts;
  for (const auto& [key, v] : by_sep) {
    if (v.second > 0) pts.emplace_back(std::log(v.first), std::log(v.second));
  }
  if (pts.size() < 2) return 1.0;
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (!(sxx > 0)) return 1.0;
  return std::clamp(sxy / sxx, 0.0, 1.0);
}

double sobolev_norm_eps(const Frame& frame, const GridFunction& f, int m, double p, bool x1_only) {
  if (m < 0) throw std::invalid_argument("sobolev_norm_eps: m must be non-negative");
  if (!(p >= 1)) throw std::invalid_argument("sobolev_norm_eps: p must be at least 1");
  require_same_grid(frame.u(), f, "sobolev_norm_eps");
  const Grid& g = f.grid();
  const IndexBox region = g.interior(m);
  if (region.empty()) throw std::invalid_argument("sobolev_norm_eps: grid too small for order m");

  std::vector<GridFunction> level{f};
  double total = 0.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) {
      std::vector<GridFunction> next;
      for (const GridFunction& s : level) {
        next.push_back(apply_x1(frame, s));
        if (!x1_only) next.push_back(apply_x2(frame, s));
      }
      level = std::move(next);
    }
    double sum = 0.0;
    for (int j = region.j0; j <= region.j1; ++j) {
      for (int i = region.i0; i <= region.i1; ++i) {
        double sq = 0.0;
        for (const GridFunction& s : level) sq += s(i, j) * s(i, j);
        sum += std::pow(sq, p / 2);
      }
    }
    total += std::pow(sum * g.h1() * g.h2(), 1.0 / p);
  }
  return total;
}

double sobolev_norm_eps(const Frame& frame, int m, double p) { return sobolev_norm_eps(frame, frame.u(), m, p); }

DerivativeResiduals derivative_equation_residuals(const Frame& frame, double margin) {
  const Grid& g = frame.grid();
  const double eps = frame.epsilon();
  const GridFunction& u = frame.u();
  const CoefficientField c = coefficients(frame);
  const GridFunction p1 = apply_x1(frame, u);
  const GridFunction p2 = apply_x2(frame, u);
  const GridFunction v = partial2(u);
  const GridFunction v2 = v * v;
  auto X1 = [&](const GridFunction& f) { return apply_x1(frame, f); };
  auto X2 = [&](const GridFunction& f) { return apply_x2(frame, f); };

  // M v = -a11 v^3 / W - sum_j a1j / W v X_j v - sum_i X_i(a_i1 / W v^2)
  const GridFunction rhs_v = (-1.0) * (c.a11 * v2 * v / c.w) - (c.a11 / c.w * v * X1(v) + c.a12 / c.w * v * X2(v)) -
                             (X1(c.a11 / c.w * v2) + X2(c.a21 / c.w * v2));
  // M X_1 u = eps v d2(X2 u / W) + X1(eps a12 v^2 / W) + X2(eps a22 v^2 / W)
  const GridFunction rhs_1 =
      eps * (v * partial2(p2 / c.w)) + X1(eps * (c.a12 / c.w * v2)) + X2(eps * (c.a22 / c.w * v2));
  // M X_2 u = -eps v d2(X1 u / W) - X1(eps a11 v^2 / W) - X2(eps a21 v^2 / W)
  const GridFunction rhs_2 =
      (-eps) * (v * partial2(p1 / c.w)) - X1(eps * (c.a11 / c.w * v2)) - X2(eps * (c.a21 / c.w * v2));

  const IndexBox region = g.compact(margin, 3);
  if (region.empty()) throw std::invalid_argument("derivative_equation_residuals: empty region");
  DerivativeResiduals out;
  out.v = (linearized_apply(frame, v) - rhs_v).sup_norm(region);
  out.z1 = (linearized_apply(frame, p1) - rhs_1).sup_norm(region);
  out.z2 = (linearized_apply(frame, p2) - rhs_2).sup_norm(region);
  return out;
}

NormLedgerRow norm_ledger_row(const Frame& frame, const DiagnosticsConfig& config) {
  NormLedgerRow row;
  row.eps = frame.epsilon();
  row.m_bound = m_bound(frame);
  row.w22 = sobolev_norm_eps(frame, 2, 2.0);
  row.d2u_w12 = sobolev_norm_eps(frame, partial2(frame.u()), 1, 2.0);
  row.wmp = sobolev_norm_eps(frame, config.sobolev_m, config.sobolev_p);
  HolderOptions opts = config.holder_options;
  if (!opts.region) opts.region = monitored(frame.grid(), config.compact_margin);
  const Interval window = default_window(frame.grid(), config.holder_window);
  for (const double a : config.alphas) row.holder.push_back({a, holder_of_gradient(frame, a, window, opts), true});
  return row;
}

std::vector<NormLedgerRow> norm_ledger(const VanishingViscosityRun& run, const DiagnosticsConfig& config) {
  std::vector<NormLedgerRow> rows;
  for (std::size_t k = 0; k < run.solutions.size(); ++k) {
    rows.push_back(norm_ledger_row(Frame(run.eps[k], run.solutions[k]), config));
  }
  return rows;
}

RegularityVerdict verdict(const VanishingViscosityRun& run, const Budgets& budgets, const DiagnosticsConfig& config,
                          const std::optional<GridFunction>& reference) {
  if (run.solutions.empty()) throw std::invalid_argument("verdict: run has no solutions");
  RegularityVerdict out;
  const GridFunction& u = run.solutions.back();
  const Grid& g = u.grid();
  const Frame frame(run.eps.back(), u);
  out.eps = frame.epsilon();
  const IndexBox region = intersect(monitored(g, config.compact_margin), g.interior(2));

  for (const GridFunction& s : run.solutions) {
    out.x2u_trend.push_back(intrinsic_derivative(s, 2).field.sup_norm(region));
  }
  out.x2u_sup = out.x2u_trend.back();
  out.x2u_pass = out.x2u_sup <= budgets.x2u_sup;

  HolderOptions opts = config.holder_options;
  if (!opts.region) opts.region = region;
  const Interval window = default_window(g, config.holder_window);
  bool holder_pass = true;
  for (const double a : config.alphas) {
    const double s = holder_of_gradient(frame, a, window, opts);
    out.alpha_estimates.push_back({a, s, s <= budgets.holder});
    holder_pass = holder_pass && s <= budgets.holder;
  }
  out.alpha_exponent = std::min(holder_exponent(apply_x1(frame, u), window, opts),
                                holder_exponent(apply_x2(frame, u), window, opts));

  const DerivativeResiduals r = derivative_equation_residuals(frame, config.compact_margin);
  out.v_equation_residual = r.v;
  out.z_equation_residual = r.z();
  out.residual_pass = r.v <= budgets.v_residual && r.z() <= budgets.z_residual;

  const auto [lo, hi] = std::minmax_element(run.lipschitz_norms.begin(), run.lipschitz_norms.end());
  out.lip_ratio = (lo == run.lipschitz_norms.end() || *lo <= 0) ? 1.0 : *hi / *lo;
  out.uniformity_pass = out.lip_ratio <= budgets.lip_ratio;

  if (reference) out.reference_gap = (u - *reference).sup_norm();
  out.all_pass = out.x2u_pass && holder_pass && out.residual_pass && out.uniformity_pass;
  return out;
}

}  // namespace hmin
