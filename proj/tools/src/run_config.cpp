#include "run_config.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "expression.hpp"

namespace hmin::cli {

namespace {

using nlohmann::json;

// A JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
    throw ConfigError("config: " + (where.empty() ? std::string("<root>") : where) + ": " + what);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, Interval& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        fail(key, "expected [lo, hi]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }
  void get(const std::string& key, Point& out) {
    Interval tmp{out.x1, out.x2};
    get(key, tmp);
    out = {tmp.lo, tmp.hi};
  }
  template <std::size_t N>
  void get(const std::string& key, std::array<double, N>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != N) fail(key, "expected an array of " + std::to_string(N) + " numbers");
      for (std::size_t k = 0; k < N; ++k) {
        if (!(*v)[k].is_number()) fail(key, "expected numbers");
        out[k] = (*v)[k].get<double>();
      }
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  std::optional<Section> child(const std::string& key) {
    if (const json* v = find(key)) return Section(*v, path_.empty() ? key : path_ + "." + key);
    return std::nullopt;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

  void require(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) fail(key, what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json interval(Interval i) { return json::array({i.lo, i.hi}); }

}  // namespace

std::function<double(Point)> RunConfig::boundary_function() const {
  if (!boundary.catalog.empty()) return hmin::catalog_entry(boundary.catalog).eval;
  Expression e(boundary.expression);
  return [e](Point x) { return e(x); };
}

std::optional<CatalogEntry> RunConfig::catalog_entry() const {
  if (boundary.catalog.empty()) return std::nullopt;
  return hmin::catalog_entry(boundary.catalog);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig c;
  Section root(j, "");
  if (auto s = root.child("grid")) {
    s->get("x1", c.grid.x1);
    s->get("x2", c.grid.x2);
    s->get("n1", c.grid.n1);
    s->get("n2", c.grid.n2);
    s->require(c.grid.n1 >= 3 && c.grid.n2 >= 3, "n1", "node counts must be at least 3");
    s->require(c.grid.x1.width() > 0 && c.grid.x2.width() > 0, "x1", "ranges must have positive width");
    s->finish();
  }
  if (auto s = root.child("boundary")) {
    c.boundary = {};
    s->get("catalog", c.boundary.catalog);
    s->get("expression", c.boundary.expression);
    s->require(c.boundary.catalog.empty() != c.boundary.expression.empty(), "",
               "set exactly one of 'catalog' and 'expression'");
    if (!c.boundary.catalog.empty()) {
      try {
        hmin::catalog_entry(c.boundary.catalog);
      } catch (const std::invalid_argument& e) {
        s->fail("catalog", e.what());
      }
    } else {
      try {
        Expression e(c.boundary.expression);
      } catch (const ExpressionError& e) {
        s->fail("expression", e.what());
      }
    }
    s->finish();
  }
  root.get("epsilon", c.epsilon);
  root.require(c.epsilon > 0, "epsilon", "must be positive");
  if (auto s = root.child("schedule")) {
    s->get("eps_start", c.schedule.eps_start);
    s->get("eps_factor", c.schedule.eps_factor);
    s->get("eps_min", c.schedule.eps_min);
    s->get("steps", c.schedule.steps);
    try {
      c.schedule.validate();
    } catch (const std::invalid_argument& e) {
      s->fail("", e.what());
    }
    s->finish();
  }
  if (auto s = root.child("solver")) {
    s->get("newton_tol", c.solver.newton_tol);
    s->get("max_newton_iters", c.solver.max_newton_iters);
    s->get("armijo_c", c.solver.armijo_c);
    s->get("armijo_shrink", c.solver.armijo_shrink);
    s->get("max_line_search", c.solver.max_line_search);
    s->get("picard_fallback", c.solver.picard_fallback);
    s->get("max_picard_iters", c.solver.max_picard_iters);
    s->get("linear_solver_tol", c.solver.linear_solver_tol);
    try {
      c.solver.validate();
    } catch (const std::invalid_argument& e) {
      s->fail("", e.what());
    }
    s->finish();
  }
  if (auto s = root.child("diagnostics")) {
    s->get("alphas", c.diagnostics.alphas);
    s->get("holder_window", c.diagnostics.holder_window);
    s->get("compact_margin", c.diagnostics.compact_margin);
    s->get("sobolev_m", c.diagnostics.sobolev_m);
    s->get("sobolev_p", c.diagnostics.sobolev_p);
    s->get("holder_max_pairs", c.diagnostics.holder_options.max_pairs);
    s->get("seed", c.diagnostics.holder_options.seed);
    for (const double a : c.diagnostics.alphas) s->require(a > 0 && a < 1, "alphas", "each alpha must lie in (0, 1)");
    s->require(c.diagnostics.sobolev_m >= 0, "sobolev_m", "must be non-negative");
    s->require(c.diagnostics.sobolev_p >= 1, "sobolev_p", "must be at least 1");
    s->require(c.diagnostics.compact_margin >= 0, "compact_margin", "must be non-negative");
    s->finish();
  }
  if (auto s = root.child("budgets")) {
    s->get("x2u_sup", c.budgets.x2u_sup);
    s->get("holder", c.budgets.holder);
    s->get("v_residual", c.budgets.v_residual);
    s->get("z_residual", c.budgets.z_residual);
    s->get("lip_ratio", c.budgets.lip_ratio);
    s->finish();
  }
  if (c.boundary.catalog.empty()) c.foliation.source = "grid";  // default only; an explicit source wins
  if (auto s = root.child("foliation")) {
    s->get("source", c.foliation.source);
    s->get("seed_spacing", c.foliation.seed_spacing);
    s->get("dt", c.foliation.dt);
    s->get("stride", c.foliation.stride);
    s->get("fill_gaps", c.foliation.fill_gaps);
    const std::string& src = c.foliation.source;
    s->require(src == "catalog" || src == "grid" || src == "solution", "source",
               "expected 'catalog', 'grid' or 'solution'");
    s->require(c.foliation.seed_spacing >= 0 && c.foliation.dt >= 0, "", "spacings must be non-negative");
    s->require(c.foliation.stride >= 1, "stride", "must be at least 1");
    s->finish();
  }
  if (c.foliation.source == "catalog" && c.boundary.catalog.empty()) {
    root.fail("foliation.source", "'catalog' requires boundary.catalog");
  }
  if (auto s = root.child("distance")) {
    s->get("x0", c.distance.x0);
    s->get("epsilon", c.distance.epsilon);
    s->get("points", c.distance.points);
    s->get("radius", c.distance.radius);
    s->get("delta", c.distance.delta);
    s->get("ratio_bound", c.distance.ratio_bound);
    s->get("seed", c.distance.seed);
    s->get("solve", c.distance.solve);
    s->require(c.distance.epsilon > 0 && c.distance.delta > 0, "", "epsilon and delta must be positive");
    s->require(c.distance.points >= 1, "points", "must be at least 1");
    s->require(c.distance.ratio_bound >= 1, "ratio_bound", "must be at least 1");
    s->require(std::abs(c.distance.radius[2]) < 1, "radius", "s radius must be below 1");
    s->finish();
  }
  root.get("output_dir", c.output_dir);
  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"x1", interval(c.grid.x1)}, {"x2", interval(c.grid.x2)}, {"n1", c.grid.n1}, {"n2", c.grid.n2}};
  j["boundary"] = c.boundary.catalog.empty() ? json{{"expression", c.boundary.expression}}
                                             : json{{"catalog", c.boundary.catalog}};
  j["epsilon"] = c.epsilon;
  j["schedule"] = {{"eps_start", c.schedule.eps_start},
                   {"eps_factor", c.schedule.eps_factor},
                   {"eps_min", c.schedule.eps_min},
                   {"steps", c.schedule.steps}};
  j["solver"] = {{"newton_tol", c.solver.newton_tol},
                 {"max_newton_iters", c.solver.max_newton_iters},
                 {"armijo_c", c.solver.armijo_c},
                 {"armijo_shrink", c.solver.armijo_shrink},
                 {"max_line_search", c.solver.max_line_search},
                 {"picard_fallback", c.solver.picard_fallback},
                 {"max_picard_iters", c.solver.max_picard_iters},
                 {"linear_solver_tol", c.solver.linear_solver_tol}};
  j["diagnostics"] = {{"alphas", c.diagnostics.alphas},
                      {"holder_window", interval(c.diagnostics.holder_window)},
                      {"compact_margin", c.diagnostics.compact_margin},
                      {"sobolev_m", c.diagnostics.sobolev_m},
                      {"sobolev_p", c.diagnostics.sobolev_p},
                      {"holder_max_pairs", static_cast<std::uint64_t>(c.diagnostics.holder_options.max_pairs)},
                      {"seed", c.diagnostics.holder_options.seed}};
  j["budgets"] = {{"x2u_sup", c.budgets.x2u_sup},
                  {"holder", c.budgets.holder},
                  {"v_residual", c.budgets.v_residual},
                  {"z_residual", c.budgets.z_residual},
                  {"lip_ratio", c.budgets.lip_ratio}};
  j["foliation"] = {{"source", c.foliation.source},
                    {"seed_spacing", c.foliation.seed_spacing},
                    {"dt", c.foliation.dt},
                    {"stride", c.foliation.stride},
                    {"fill_gaps", c.foliation.fill_gaps}};
  j["distance"] = {{"x0", json::array({c.distance.x0.x1, c.distance.x0.x2})},
                   {"epsilon", c.distance.epsilon},
                   {"points", c.distance.points},
                   {"radius", c.distance.radius},
                   {"delta", c.distance.delta},
                   {"ratio_bound", c.distance.ratio_bound},
                   {"seed", c.distance.seed},
                   {"solve", c.distance.solve}};
  j["output_dir"] = c.output_dir;
  return j;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path output_dir(const RunConfig& config) {
  if (const char* env = std::getenv("HMIN_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.output_dir;
}

}  // namespace hmin::cli
