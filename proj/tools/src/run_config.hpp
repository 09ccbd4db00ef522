#ifndef HMIN_TOOLS_RUN_CONFIG_HPP
#define HMIN_TOOLS_RUN_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

#include "hmin/diagnostics.hpp"
#include "hmin/examples.hpp"
#include "hmin/grid.hpp"
#include "hmin/solver.hpp"

namespace hmin::cli {

/// Raised for unreadable, malformed or inconsistent configuration. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  Interval x1{0.0, 1.0};
  Interval x2{0.0, 1.0};
  int n1 = 65;
  int n2 = 65;

  Grid make() const { return Grid(x1, x2, n1, n2); }
};

/// Exactly one of catalog / expression is set.
struct BoundarySource {
  std::string catalog;
  std::string expression;
};

struct FoliationSpec {
  std::string source = "catalog";  // catalog | grid | solution; grid when the boundary is an expression
  double seed_spacing = 0.0;       // 0: h2
  double dt = 0.0;                 // 0: h1 / 2
  int stride = 1;
  bool fill_gaps = true;
};

struct DistanceSpec {
  Point x0{0.5, 0.5};
  double epsilon = 0.4;
  int points = 20;
  std::array<double, 3> radius{0.1, 0.05, 0.15};  // x1, x2, s
  double delta = 0.01;
  double ratio_bound = 5.0;
  std::uint64_t seed = 7;
  bool solve = false;  // freeze the solved u instead of the boundary source
};

struct RunConfig {
  GridSpec grid;
  BoundarySource boundary{"affine", ""};
  double epsilon = 1.0;  // solve
  EpsSchedule schedule;
  SolverConfig solver;
  DiagnosticsConfig diagnostics;
  Budgets budgets;
  FoliationSpec foliation;
  DistanceSpec distance;
  std::string output_dir = "hmin_out";

  /// Boundary/initial data as a function of x.
  std::function<double(Point)> boundary_function() const;
  /// The catalog entry when the source is a catalog name.
  std::optional<CatalogEntry> catalog_entry() const;
};

/// Strict parse: unknown keys, wrong types and invalid values raise ConfigError. JSON syntax
/// errors carry the line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Output directory: HMIN_OUTPUT_DIR when set, else config.output_dir.
std::filesystem::path output_dir(const RunConfig& config);

}  // namespace hmin::cli

#endif  // HMIN_TOOLS_RUN_CONFIG_HPP
