#include "hmin/examples.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hmin {

namespace {

std::string bracket_text(Interval b) {
  std::ostringstream s;
  s << "[" << b.lo << ", " << b.hi << "]";
  return s.str();
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2 * a)) - std::log(2.0);
}

}  // namespace

double pauls_graph(Point x) {
  if (!(x.x1 > 1.0)) throw std::domain_error("pauls_graph: requires x1 > 1");
  const double sgn = x.x2 >= 0.0 ? 1.0 : -1.0;
  return x.x2 / (x.x1 - sgn);
}

CatalogEntry affine_graph(double a, double c) {
  CatalogEntry e;
  std::ostringstream d;
  d << "u = " << a << " x1 " << (c < 0 ? "- " : "+ ") << std::abs(c);
  e.name = "affine";
  e.description = d.str();
  e.eval = [a, c](Point x) { return a * x.x1 + c; };
  e.domain = [](Point) { return true; };
  e.flags = {true, true, true, true};
  e.x1_range = {0.0, 1.0};
  e.x2_range = {0.0, 1.0};
  return e;
}

double shear_graph(const std::function<double(double)>& g, Point x, Interval bracket) {
  auto F = [&](double t) { return x.x1 * t - g(t) - x.x2; };

  // Monotonicity pre-check on a sample of the bracket: exactly one sign change allowed.
  constexpr int kSamples = 256;
  int changes = 0;
  double lo = bracket.lo, hi = bracket.hi;
  double prev_t = bracket.lo, prev = F(prev_t);
  if (prev == 0.0) return prev_t;
  for (int k = 1; k <= kSamples; ++k) {
    const double t = bracket.lo + bracket.width() * k / kSamples;
    const double f = F(t);
    if (!std::isfinite(f)) throw std::domain_error("shear_graph: non-finite profile in bracket " + bracket_text(bracket));
    if (f == 0.0) return t;
    if ((f > 0) != (prev > 0)) {
      ++changes;
      lo = prev_t;
      hi = t;
    }
    prev = f;
    prev_t = t;
  }
  if (changes == 0) throw std::domain_error("shear_graph: no root in bracket " + bracket_text(bracket));
  if (changes > 1) throw std::domain_error("shear_graph: multiple roots in bracket " + bracket_text(bracket));

  double flo = F(lo);
  if (F(hi) == 0.0) return hi;
  while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    const double fm = F(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi);
  const double slope = (F(hi) - F(lo)) / (hi - lo);
  if (std::isfinite(slope) && slope != 0.0) {
    const double polished = t - F(t) / slope;
    if (std::abs(F(polished)) < std::abs(F(t))) t = polished;
  }
  return t;
}

CatalogEntry shear_entry(std::string name, std::function<double(double)> g, Interval x1_range, Interval x2_range,
                         CatalogFlags flags, Interval bracket) {
  CatalogEntry e;
  e.name = std::move(name);
  e.description = "shear x2 - x1 x3 + g(x3)";
  e.eval = [g = std::move(g), bracket](Point x) { return shear_graph(g, x, bracket); };
  e.domain = [x1_range, x2_range](Point x) { return x1_range.contains(x.x1) && x2_range.contains(x.x2); };
  e.flags = flags;
  e.x1_range = x1_range;
  e.x2_range = x2_range;
  return e;
}

CatalogEntry logcosh_benchmark(double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("logcosh_benchmark: sigma must be positive");
  CatalogEntry e = shear_entry(
      "shear_logcosh", [sigma](double t) { return sigma * log_cosh(t / sigma); }, {2.0, 3.0}, {-1.0, 1.0},
      {true, true, true, true});
  std::ostringstream d;
  d << "shear with g(t) = " << sigma << " log cosh(t / " << sigma << ")";
  e.description = d.str();
  return e;
}

std::vector<std::string> catalog_names() {
  return {"pauls", "affine", "constant", "x2", "shear_zero", "shear_linear", "shear_logcosh"};
}

CatalogEntry catalog_entry(const std::string& name) {
  if (name == "pauls") {
    CatalogEntry e;
    e.name = name;
    e.description = "u = x2 / (x1 - sgn x2), x1 > 1";
    e.eval = pauls_graph;
    e.domain = [](Point x) { return x.x1 > 1.0; };
    e.flags = {true, false, false, true};
    e.x1_range = {2.0, 3.0};
    e.x2_range = {-1.0, 1.0};
    return e;
  }
  if (name == "affine") {
    CatalogEntry e = affine_graph(2.0, -1.0);
    return e;
  }
  if (name == "constant") {
    CatalogEntry e = affine_graph(0.0, 3.0);
    e.name = name;
    e.description = "u = 3";
    return e;
  }
  if (name == "x2") {
    CatalogEntry e;
    e.name = name;
    e.description = "u = x2 (not a minimal graph)";
    e.eval = [](Point x) { return x.x2; };
    e.domain = [](Point) { return true; };
    e.flags = {false, false, true, false};
    e.x1_range = {0.0, 1.0};
    e.x2_range = {0.0, 1.0};
    return e;
  }
  if (name == "shear_zero") {
    CatalogEntry e = shear_entry(name, [](double) { return 0.0; }, {1.0, 2.0}, {-1.0, 1.0}, {true, true, true, true});
    e.description = "u = x2 / x1";
    return e;
  }
  if (name == "shear_linear") {
    CatalogEntry e = shear_entry(name, [](double t) { return -t; }, {1.0, 2.0}, {-1.0, 1.0}, {true, true, true, true});
    e.description = "u = x2 / (x1 + 1)";
    return e;
  }
  if (name == "shear_logcosh") return logcosh_benchmark();
  throw std::invalid_argument("unknown catalog entry '" + name + "'");
}

}  // namespace hmin
