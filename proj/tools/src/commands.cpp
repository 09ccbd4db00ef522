#include "commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include "hmin/csv.hpp"
#include "hmin/diagnostics.hpp"
#include "hmin/examples.hpp"
#include "hmin/foliation.hpp"
#include "hmin/geometry.hpp"
#include "hmin/solver.hpp"
#include "json_io.hpp"
#include "run_config.hpp"

namespace hmin::cli {

namespace fs = std::filesystem;

namespace {

// Missing or inconsistent run data, a held lock, unwritable output. Exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exclusive ownership of an output directory for the lifetime of a command.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".hmin.lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST) throw DataError("output directory is locked by another run: " + path_.string());
      throw DataError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

struct Context {
  RunConfig config;
  fs::path dir;
  json prov;
};

// Iteration records as JSON lines, one file per command.
class LogFile {
 public:
  LogFile(const fs::path& dir, const std::string& command) : out_(dir / (command + ".log.jsonl")) {
    if (!out_) throw DataError("cannot write log in " + dir.string());
  }
  LogSink sink(const std::map<std::string, json>& tags = {}) {
    return [this, tags](const IterationRecord& r) {
      json j = to_json(r);
      for (const auto& [k, v] : tags) j[k] = v;
      out_ << j.dump() << '\n';
    };
  }

 private:
  std::ofstream out_;
};

void write_grid(const fs::path& path, const GridFunction& f, const std::string& name = "u") {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_grid_csv(out, f, name);
}

GridFunction read_grid(const fs::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw DataError("missing run data: " + path.string());
  try {
    return read_grid_csv(in, grid);
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Boundary data sampled on the grid; domain violations are configuration errors.
GridFunction sample_source(const RunConfig& c, const Grid& g) {
  const auto f = c.boundary_function();
  try {
    GridFunction s = GridFunction::sample(g, f);
    if (!s.all_finite()) throw ConfigError("config: boundary source is not finite on the grid");
    return s;
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: boundary source undefined on the grid: ") + e.what());
  }
}

json grid_json(const Grid& g) {
  return {{"x1", {g.x1_range().lo, g.x1_range().hi}},
          {"x2", {g.x2_range().lo, g.x2_range().hi}},
          {"n1", g.n1()},
          {"n2", g.n2()}};
}

std::string solution_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%03zu.csv", k);
  return buf;
}

json with_provenance(const Context& ctx, json body) {
  body["provenance"] = ctx.prov;
  return body;
}

int cmd_solve(Context& ctx, std::ostream& out) {
  const RunConfig& c = ctx.config;
  const Grid g = c.grid.make();
  sample_source(c, g);
  LogFile log(ctx.dir, "solve");
  try {
    const SolveResult r = solve_eps(g, c.boundary_function(), c.epsilon, c.solver, {}, log.sink());
    write_grid(ctx.dir / "u.csv", r.u);
    write_json(ctx.dir / "solve_report.json", with_provenance(ctx, to_json(r.report)));
    out << "solve: converged at eps=" << c.epsilon << " in " << r.report.newton_iterations
        << " Newton iterations, residual " << r.report.residual_sup << '\n';
    return kOk;
  } catch (const NonConvergence& e) {
    write_grid(ctx.dir / "u.csv", e.best());
    write_json(ctx.dir / "solve_report.json", with_provenance(ctx, to_json(e.report())));
    throw;
  }
}

int cmd_continuation(Context& ctx, std::ostream& out) {
  const RunConfig& c = ctx.config;
  const Grid g = c.grid.make();
  sample_source(c, g);
  LogFile log(ctx.dir, "continuation");
  VanishingViscosityRun run;
  try {
    run = continuation(g, c.boundary_function(), c.schedule, c.solver, log.sink());
  } catch (const NonConvergence& e) {
    write_grid(ctx.dir / "u.csv", e.best());
    write_json(ctx.dir / "continuation_failure.json",
               with_provenance(ctx, {{"error", e.what()}, {"report", to_json(e.report())}}));
    throw;
  }
  json files = json::array(), reports = json::array();
  for (std::size_t k = 0; k < run.solutions.size(); ++k) {
    write_grid(ctx.dir / solution_name(k), run.solutions[k]);
    files.push_back(solution_name(k));
    reports.push_back(to_json(run.reports[k]));
  }
  write_grid(ctx.dir / "u.csv", run.solutions.back());
  write_json(ctx.dir / "run.json", with_provenance(ctx, {{"grid", grid_json(g)},
                                                         {"eps", run.eps},
                                                         {"solutions", files},
                                                         {"lipschitz_norms", run.lipschitz_norms},
                                                         {"m_bounds", run.m_bounds},
                                                         {"reports", reports}}));
  json rows = json::array();
  for (const NormLedgerRow& row : norm_ledger(run, c.diagnostics)) rows.push_back(to_json(row));
  write_json(ctx.dir / "norm_ledger.json", with_provenance(ctx, {{"rows", rows}}));
  out << "continuation: " << run.solutions.size() << " steps down to eps=" << run.eps.back() << '\n';
  return kOk;
}

VanishingViscosityRun load_run(const Context& ctx, const Grid& g) {
  const fs::path meta = ctx.dir / "run.json";
  if (!fs::exists(meta)) throw DataError("missing run data: " + meta.string() + " (run 'continuation' first)");
  json j;
  try {
    j = read_json(meta);
  } catch (const json::exception& e) {
    throw DataError(meta.string() + ": " + e.what());
  }
  if (!j.contains("grid") || j["grid"] != grid_json(g)) {
    throw DataError(meta.string() + ": run grid differs from the configured grid");
  }
  VanishingViscosityRun run;
  run.schedule = ctx.config.schedule;
  try {
    run.eps = j.at("eps").get<std::vector<double>>();
    const auto files = j.at("solutions").get<std::vector<std::string>>();
    if (files.size() != run.eps.size() || files.empty()) throw DataError(meta.string() + ": inconsistent run");
    for (std::size_t k = 0; k < files.size(); ++k) {
      run.solutions.push_back(read_grid(ctx.dir / files[k], g));
      run.lipschitz_norms.push_back(run.solutions.back().lip_norm());
      run.m_bounds.push_back(m_bound(Frame(run.eps[k], run.solutions.back())));
    }
  } catch (const json::exception& e) {
    throw DataError(meta.string() + ": " + e.what());
  }
  return run;
}

int cmd_diagnose(Context& ctx, std::ostream& out) {
  const RunConfig& c = ctx.config;
  const Grid g = c.grid.make();
  const VanishingViscosityRun run = load_run(ctx, g);
  std::optional<GridFunction> reference;
  if (const auto entry = c.catalog_entry(); entry && entry->flags.vanishing_viscosity_candidate) {
    reference = sample_source(c, g);
  }
  const RegularityVerdict v = verdict(run, c.budgets, c.diagnostics, reference);
  write_json(ctx.dir / "verdict.json", with_provenance(ctx, to_json(v)));
  out << "diagnose: " << (v.all_pass ? "all pass" : "budget exceeded") << " at eps=" << v.eps << '\n';
  return kOk;
}

int cmd_foliate(Context& ctx, std::ostream& out) {
  const RunConfig& c = ctx.config;
  const FoliationSpec& spec = c.foliation;
  const Grid g = c.grid.make();
  const double spacing = spec.seed_spacing > 0 ? spec.seed_spacing : g.h2();
  const double dt = spec.dt > 0 ? spec.dt : 0.5 * g.h1();
  const Interval span{-g.x1_range().width(), g.x1_range().width()};

  std::vector<Leaf> leaves;
  std::optional<double> coverage;
  if (spec.source == "catalog") {
    const CatalogEntry e = *c.catalog_entry();
    sample_source(c, g);
    const int n = static_cast<int>(std::floor(g.x2_range().width() / spacing + 1e-9));
    for (int k = 0; k <= n; ++k) {
      const Point seed{g.x1_range().lo, g.x2_range().lo + k * spacing};
      try {
        leaves.push_back(trace_leaf(e.eval, g.x1_range(), g.x2_range(), seed, span, dt));
      } catch (const std::invalid_argument&) {
        // corner seed leaving the box immediately
      }
    }
  } else {
    const GridFunction u = spec.source == "grid" ? sample_source(c, g) : read_grid(ctx.dir / "u.csv", g);
    FoliationCover cover = foliation_cover(u, spacing, dt, spec.fill_gaps);
    leaves = std::move(cover.leaves);
    coverage = cover.coverage;
  }

  const fs::path leaf_dir = ctx.dir / "leaves";
  fs::create_directories(leaf_dir);
  json summaries = json::array();
  double max_c3 = 0.0, max_first = 0.0, max_second = 0.0;
  int skipped = 0;
  for (const Leaf& raw : leaves) {
    if (raw.t.size() < 8) {
      ++skipped;
      continue;
    }
    const Leaf leaf = fit_leaf(raw);
    const auto lie = lie_derivatives(leaf, spec.stride);
    char name[32];
    std::snprintf(name, sizeof name, "leaf_%04zu.csv", summaries.size());
    std::ofstream csv(leaf_dir / name);
    if (!csv) throw DataError("cannot write " + (leaf_dir / name).string());
    write_leaf_csv(csv, leaf, lie);
    json s = leaf_summary(leaf, lie);
    s["file"] = std::string("leaves/") + name;
    max_c3 = std::max(max_c3, std::abs(leaf.c3()));
    max_first = std::max(max_first, s["max_first"].get<double>());
    max_second = std::max(max_second, s["max_second"].get<double>());
    summaries.push_back(std::move(s));
  }
  json body = {{"source", spec.source},
               {"leaves", summaries},
               {"skipped_short_leaves", skipped},
               {"max_abs_c3", max_c3},
               {"max_first", max_first},
               {"max_second", max_second},
               {"crossings", count_crossings(leaves)}};
  body["coverage"] = coverage ? json(*coverage) : json(leaf_coverage(g, leaves));
  write_json(ctx.dir / "foliation.json", with_provenance(ctx, body));
  out << "foliate: " << summaries.size() << " leaves, max |c3| " << max_c3 << '\n';
  return kOk;
}

int cmd_example(Context& ctx, std::ostream& out) {
  const RunConfig& c = ctx.config;
  if (c.boundary.catalog.empty()) throw ConfigError("config: example needs boundary.catalog");
  const Grid g = c.grid.make();
  write_grid(ctx.dir / (c.boundary.catalog + ".csv"), sample_source(c, g));
  out << "example: wrote " << c.boundary.catalog << ".csv\n";
  return kOk;
}

int cmd_distance(Context& ctx, std::ostream& out) {
  const RunConfig& c = ctx.config;
  const DistanceSpec& d = c.distance;
  const Grid g = c.grid.make();
  GridFunction u = sample_source(c, g);
  if (d.solve) {
    LogFile log(ctx.dir, "distance");
    u = solve_eps(g, c.boundary_function(), d.epsilon, c.solver, {}, log.sink()).u;
  }
  const Frame frame(d.epsilon, u);

  // Base point snapped to the nearest interior node.
  const int i0 = std::clamp(static_cast<int>(std::lround((d.x0.x1 - g.x1_range().lo) / g.h1())), 1, g.n1() - 2);
  const int j0 = std::clamp(static_cast<int>(std::lround((d.x0.x2 - g.x2_range().lo) / g.h2())), 1, g.n2() - 2);
  const FrozenFrame ff = taylor_p1(frame, g.node(i0, j0));

  std::mt19937_64 rng(d.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::ofstream csv(ctx.dir / "distance.csv");
  if (!csv) throw DataError("cannot write distance.csv");
  csv << "x1,x2,s,surrogate_eps,surrogate_cc,oracle,ratio\n";
  int within = 0, failed = 0;
  double lo = INFINITY, hi = 0.0;
  for (int k = 0; k < d.points; ++k) {
    const double dx1 = d.radius[0] * unit(rng);
    const double dw = d.radius[1] * unit(rng);
    const double s = d.radius[2] * unit(rng);
    const LiftedPoint p{{ff.x0.x1 + dx1, ff.x0.x2 + ff.u0 * dx1 + dw}, s};
    if (!g.contains(p.x)) {
      ++failed;
      continue;
    }
    const double se = dist_surrogate_eps(ff, p);
    const double sc = dist_surrogate_cc(ff, p);
    double oracle = NAN;
    try {
      oracle = dist_oracle(ff, p, d.delta);
    } catch (const std::exception&) {
      ++failed;
    }
    const double ratio = se > 0 ? oracle / se : NAN;
    if (std::isfinite(ratio)) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      if (ratio >= 1.0 / d.ratio_bound && ratio <= d.ratio_bound) ++within;
    }
    write_csv_row(csv, {p.x.x1, p.x.x2, p.s, se, sc, oracle, ratio});
  }
  write_json(ctx.dir / "distance.json",
             with_provenance(ctx, {{"x0", {ff.x0.x1, ff.x0.x2}},
                                   {"points", d.points},
                                   {"within_bounds", within},
                                   {"failed", failed},
                                   {"ratio_min", std::isfinite(lo) ? json(lo) : json(nullptr)},
                                   {"ratio_max", hi > 0 ? json(hi) : json(nullptr)},
                                   {"ratio_bound", d.ratio_bound},
                                   {"all_within", within == d.points}}));
  out << "distance: " << within << "/" << d.points << " ratios within [1/" << d.ratio_bound << ", "
      << d.ratio_bound << "]\n";
  return kOk;
}

using Handler = int (*)(Context&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{{"solve", cmd_solve},       {"continuation", cmd_continuation},
                                                {"foliate", cmd_foliate},   {"diagnose", cmd_diagnose},
                                                {"example", cmd_example},   {"distance", cmd_distance}};
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve", "continuation", "foliate", "diagnose", "example", "distance"};
  return names;
}

int run_command(const std::string& name, const fs::path& config_path, std::ostream& out, std::ostream& err) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) {
    err << "error: unknown command '" << name << "'\n";
    return kUsageOrData;
  }
  try {
    Context ctx;
    ctx.config = load_config(config_path);
    ctx.dir = output_dir(ctx.config);
    ctx.prov = provenance(ctx.config);
    ctx.prov["command"] = name;
    const RunLock lock(ctx.dir);
    return it->second(ctx, out);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "; best iterate written\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrData;
  }
}

int list_catalog(std::ostream& out) {
  for (const std::string& n : catalog_names()) out << n << '\t' << catalog_entry(n).description << '\n';
  return kOk;
}

}  // namespace hmin::cli
