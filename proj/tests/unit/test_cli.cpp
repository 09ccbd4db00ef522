#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "expression.hpp"
#include "hmin/csv.hpp"
#include "hmin/examples.hpp"
#include "json_io.hpp"
#include "run_config.hpp"

using namespace hmin;
using namespace hmin::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hmin_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string err;
};

// Runs the hmin binary with HMIN_OUTPUT_DIR pointing at `out`.
CliResult hmin_run(const std::string& args, const fs::path& out) {
  const fs::path err = out.parent_path() / (out.filename().string() + ".stderr");
  const std::string cmd = "HMIN_OUTPUT_DIR='" + out.string() + "' '" HMIN_BINARY "' " + args + " >/dev/null 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(err)};
}

}  // namespace

TEST(Expression, Evaluates) {
  EXPECT_DOUBLE_EQ(Expression("2*x1 - 1")({0.75, 0}), 0.5);
  EXPECT_DOUBLE_EQ(Expression("-x2^2 + sin(pi*x1)")({0.5, 3}), -8.0);
  EXPECT_DOUBLE_EQ(Expression("2^3^2")({0, 0}), 512.0);
  EXPECT_DOUBLE_EQ(Expression("x2/(x1 - sign(x2))")({2, 1}), 1.0);
  EXPECT_NEAR(Expression("log(cosh(x1)) + sqrt(abs(x2))")({1, -4}), std::log(std::cosh(1.0)) + 2, 1e-15);
}

TEST(Expression, ErrorsCarryColumn) {
  try {
    Expression("x1 + * 2");
    FAIL();
  } catch (const ExpressionError& e) {
    EXPECT_EQ(e.column(), 6);
    EXPECT_NE(std::string(e.what()).find("column 6"), std::string::npos);
  }
  EXPECT_THROW(Expression("foo(x1)"), ExpressionError);
  EXPECT_THROW(Expression("(x1"), ExpressionError);
  EXPECT_THROW(Expression("x3"), ExpressionError);
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig c = parse_config(R"({"grid": {"n1": 33}, "epsilon": 0.25, "schedule": {"steps": 4}})");
  EXPECT_EQ(c.grid.n1, 33);
  EXPECT_EQ(c.grid.n2, 65);
  EXPECT_EQ(c.epsilon, 0.25);
  EXPECT_EQ(c.schedule.steps, 4);
  EXPECT_EQ(c.boundary.catalog, "affine");
  EXPECT_EQ(c.solver.newton_tol, 1e-10);
}

TEST(Config, ExpressionBoundaryFoliatesTheGrid) {
  EXPECT_EQ(parse_config(R"({"boundary": {"expression": "x1"}})").foliation.source, "grid");
  EXPECT_EQ(parse_config("{}").foliation.source, "catalog");
}

TEST(Config, RoundTripsThroughJson) {
  const RunConfig c = parse_config(R"({"boundary": {"expression": "x1*x2"}, "grid": {"x1": [2, 3], "n2": 17},
    "diagnostics": {"alphas": [0.5], "holder_window": [0.01, 0.1]}, "distance": {"x0": [2.5, 0.1], "solve": true},
    "foliation": {"source": "grid"}, "output_dir": "here"})");
  const nlohmann::json j = to_json(c);
  const RunConfig back = parse_config(j.dump());
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  RunConfig other = c;
  other.epsilon = 0.5;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, StrictErrors) {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("{\n\"grid\": {\n\"n1\" 3}}").find("line 3"), std::string::npos);
  EXPECT_NE(message(R"({"grid": {"n3": 3}})").find("grid.n3: unknown key"), std::string::npos);
  EXPECT_NE(message(R"({"epsilon": "small"})").find("epsilon: expected a number"), std::string::npos);
  EXPECT_NE(message(R"({"grid": {"n1": 2.5}})").find("expected an integer"), std::string::npos);
  EXPECT_NE(message(R"({"boundary": {"catalog": "nope"}})").find("unknown catalog"), std::string::npos);
  EXPECT_NE(message(R"({"boundary": {"expression": "x1 +"}})").find("column"), std::string::npos);
  EXPECT_NE(message(R"({"boundary": {"catalog": "affine", "expression": "x1"}})").find("exactly one"),
            std::string::npos);
  EXPECT_FALSE(message(R"({"schedule": {"eps_factor": 2}})").empty());
  EXPECT_FALSE(message(R"({"solver": {"max_newton_iters": 0}})").empty());
  EXPECT_FALSE(message("[1, 2]").empty());
  EXPECT_NE(message(R"({"boundary": {"expression": "x1"}, "foliation": {"source": "catalog"}})").find("requires"),
            std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, EnvironmentOverridesOutputDir) {
  RunConfig c;
  c.output_dir = "from_config";
  ::unsetenv("HMIN_OUTPUT_DIR");
  EXPECT_EQ(output_dir(c), fs::path("from_config"));
  ::setenv("HMIN_OUTPUT_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(output_dir(c), fs::path("/tmp/elsewhere"));
  ::unsetenv("HMIN_OUTPUT_DIR");
}

TEST(Cli, SolveAffineMatchesClosedForm) {
  const fs::path dir = scratch("solve");
  write_file(dir / "c.json", R"({"boundary": {"catalog": "affine"}, "epsilon": 0.5})");
  const CliResult r = hmin_run("solve '" + (dir / "c.json").string() + "'", dir / "out");
  ASSERT_EQ(r.code, 0) << r.err;
  const Grid g = parse_config(read_file(dir / "c.json")).grid.make();
  std::ifstream in(dir / "out" / "u.csv");
  const GridFunction u = read_grid_csv(in, g);
  EXPECT_LE((u - GridFunction::sample(g, catalog_entry("affine").eval)).sup_norm(), 1e-12);
  const auto report = read_json(dir / "out" / "solve_report.json");
  EXPECT_TRUE(report["converged"].get<bool>());
  EXPECT_EQ(report["provenance"]["config_hash"], config_hash(parse_config(read_file(dir / "c.json"))));
  EXPECT_TRUE(fs::exists(dir / "out" / "solve.log.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "out" / ".hmin.lock"));
}

TEST(Cli, MalformedConfigExitsOne) {
  const fs::path dir = scratch("bad");
  write_file(dir / "c.json", "{\n  \"grid\": {\n    \"n1\": 33,,\n  }\n}\n");
  const CliResult r = hmin_run("solve '" + (dir / "c.json").string() + "'", dir / "out");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, ForcedFailureExitsTwoWithBestIterate) {
  const fs::path dir = scratch("fail");
  write_file(dir / "c.json", R"({"grid": {"x1": [2, 3], "x2": [-1, 1], "n1": 33, "n2": 33},
    "boundary": {"catalog": "shear_logcosh"}, "epsilon": 1e-4,
    "solver": {"newton_tol": 1e-15, "max_newton_iters": 2, "picard_fallback": false}})");
  const CliResult r = hmin_run("solve '" + (dir / "c.json").string() + "'", dir / "out");
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "u.csv"));
  EXPECT_FALSE(read_json(dir / "out" / "solve_report.json")["converged"].get<bool>());
}

TEST(Cli, AffinePipelineAllPassAndDeterministic) {
  const fs::path dir = scratch("pipeline");
  write_file(dir / "c.json", R"({"grid": {"n1": 33, "n2": 33}, "schedule": {"steps": 5}})");
  const std::string cfg = "'" + (dir / "c.json").string() + "'";
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(hmin_run("continuation " + cfg, dir / out).code, 0);
    const CliResult r = hmin_run("diagnose " + cfg, dir / out);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const auto v = read_json(dir / "a" / "verdict.json");
  EXPECT_TRUE(v["all_pass"].get<bool>());
  for (const char* key : {"x2u_sup", "residuals", "holder", "provenance"}) EXPECT_TRUE(v.contains(key)) << key;
  const auto ledger = read_json(dir / "a" / "norm_ledger.json");
  ASSERT_EQ(ledger["rows"].size(), 5u);
  for (const char* key : {"eps", "M", "norms", "holder"}) EXPECT_TRUE(ledger["rows"][0].contains(key)) << key;
  for (const char* f : {"verdict.json", "norm_ledger.json", "run.json", "u_004.csv"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
}

TEST(Cli, DiagnoseWithoutRunExitsOne) {
  const fs::path dir = scratch("norun");
  write_file(dir / "c.json", "{}");
  const CliResult r = hmin_run("diagnose '" + (dir / "c.json").string() + "'", dir / "out");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing run data"), std::string::npos) << r.err;
}

TEST(Cli, LockedDirectoryIsRefused) {
  const fs::path dir = scratch("locked");
  write_file(dir / "c.json", "{}");
  fs::create_directories(dir / "out");
  write_file(dir / "out" / ".hmin.lock", "1\n");
  const CliResult r = hmin_run("solve '" + (dir / "c.json").string() + "'", dir / "out");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("locked"), std::string::npos) << r.err;
}

TEST(Cli, FoliatePaulsLeavesAreSegments) {
  const fs::path dir = scratch("foliate");
  write_file(dir / "c.json", R"({"grid": {"x1": [2, 3], "x2": [-1, 1], "n1": 65, "n2": 129},
    "boundary": {"catalog": "pauls"}, "foliation": {"source": "catalog", "seed_spacing": 0.05}})");
  ASSERT_EQ(hmin_run("foliate '" + (dir / "c.json").string() + "'", dir / "out").code, 0);
  const auto f = read_json(dir / "out" / "foliation.json");
  EXPECT_LE(f["max_abs_c3"].get<double>(), 1e-8);
  for (const auto& leaf : f["leaves"]) {
    if (std::abs(leaf["start"][1].get<double>()) < 0.1) continue;
    EXPECT_LE(leaf["max_first"].get<double>(), 1e-8);
    EXPECT_LE(leaf["max_second"].get<double>(), 1e-6);
  }
  const std::string csv = read_file(dir / "out" / "leaves" / "leaf_0000.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,u,first,second");
}

TEST(Cli, DistanceRatiosWithinBounds) {
  const fs::path dir = scratch("distance");
  write_file(dir / "c.json", R"({"grid": {"x1": [2, 3], "x2": [-1, 1], "n1": 33, "n2": 65},
    "boundary": {"catalog": "shear_logcosh"}, "distance": {"x0": [2.5, 0.25], "points": 20}})");
  ASSERT_EQ(hmin_run("distance '" + (dir / "c.json").string() + "'", dir / "out").code, 0);
  EXPECT_TRUE(read_json(dir / "out" / "distance.json")["all_within"].get<bool>());
  const std::string csv = read_file(dir / "out" / "distance.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,x2,s,surrogate_eps,surrogate_cc,oracle,ratio");
}

TEST(Cli, ExampleWritesGridAndListWorks) {
  const fs::path dir = scratch("example");
  write_file(dir / "c.json", R"({"grid": {"x1": [2, 3], "x2": [-1, 1], "n1": 9, "n2": 9},
    "boundary": {"catalog": "pauls"}})");
  ASSERT_EQ(hmin_run("example '" + (dir / "c.json").string() + "'", dir / "out").code, 0);
  std::ifstream in(dir / "out" / "pauls.csv");
  const Grid g({2, 3}, {-1, 1}, 9, 9);
  EXPECT_LE((read_grid_csv(in, g) - GridFunction::sample(g, pauls_graph)).sup_norm(), 0.0);
  EXPECT_EQ(hmin_run("example --list", dir / "out").code, 0);
  // Pauls is undefined on the default unit square
  write_file(dir / "d.json", R"({"boundary": {"catalog": "pauls"}})");
  EXPECT_EQ(hmin_run("example '" + (dir / "d.json").string() + "'", dir / "out2").code, 1);
}
