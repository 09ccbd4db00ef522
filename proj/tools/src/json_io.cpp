#include "json_io.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace hmin::cli {

namespace {

// nlohmann writes NaN/inf as null already; keep it explicit so readers know.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json provenance(const RunConfig& config) {
  const std::string eigen = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
  const std::string nl = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  return {{"config_hash", config_hash(config)},
          {"versions", {{"hmin", kVersion}, {"eigen", eigen}, {"nlohmann_json", nl}}}};
}

json to_json(const IterationRecord& r) {
  return {{"phase", r.phase},
          {"iteration", r.iteration},
          {"residual_sup", num(r.residual_sup)},
          {"residual_l2", num(r.residual_l2)},
          {"damping", num(r.damping)}};
}

json to_json(const SolveReport& r) {
  json history = json::array();
  for (const auto& rec : r.history) history.push_back(to_json(rec));
  return {{"eps", r.epsilon},
          {"converged", r.converged},
          {"newton_iterations", r.newton_iterations},
          {"picard_iterations", r.picard_iterations},
          {"residual_sup", num(r.residual_sup)},
          {"history", history}};
}

json to_json(const NormLedgerRow& row) {
  json holder = json::array();
  for (const auto& h : row.holder) holder.push_back({{"alpha", h.alpha}, {"seminorm", num(h.seminorm)}});
  return {{"eps", row.eps},
          {"M", num(row.m_bound)},
          {"norms", {{"w22", num(row.w22)}, {"d2u_w12", num(row.d2u_w12)}, {"wmp", num(row.wmp)}}},
          {"holder", holder}};
}

json to_json(const RegularityVerdict& v) {
  json holder = json::array();
  for (const auto& h : v.alpha_estimates) {
    holder.push_back({{"alpha", h.alpha}, {"seminorm", num(h.seminorm)}, {"pass", h.pass}});
  }
  json trend = json::array();
  for (const double x : v.x2u_trend) trend.push_back(num(x));
  return {{"eps", v.eps},
          {"holder", holder},
          {"alpha_exponent", num(v.alpha_exponent)},
          {"x2u_sup", num(v.x2u_sup)},
          {"x2u_trend", trend},
          {"residuals", {{"v", num(v.v_equation_residual)}, {"z", num(v.z_equation_residual)}}},
          {"lip_ratio", num(v.lip_ratio)},
          {"reference_gap", v.reference_gap ? num(*v.reference_gap) : json(nullptr)},
          {"pass",
           {{"x2u", v.x2u_pass}, {"residuals", v.residual_pass}, {"uniformity", v.uniformity_pass}}},
          {"all_pass", v.all_pass}};
}

json leaf_summary(const Leaf& leaf, const std::vector<LieDerivativeSample>& lie) {
  double first = 0.0, second = 0.0;
  for (const auto& s : lie) {
    first = std::max(first, std::abs(s.first));
    second = std::max(second, std::abs(s.second));
  }
  auto arr = [](const auto& a) {
    json out = json::array();
    for (const double x : a) out.push_back(num(x));
    return out;
  };
  return {{"start", {leaf.start.x1, leaf.start.x2}},
          {"samples", leaf.t.size()},
          {"length", leaf.length()},
          {"t_center", leaf.t_center},
          {"c3", num(leaf.c3())},
          {"cubic", arr(leaf.poly_fit)},
          {"quadratic", arr(leaf.quad_fit)},
          {"u_quadratic", arr(leaf.u_fit)},
          {"cubic_residual", num(leaf.cubic_residual)},
          {"quadratic_residual", num(leaf.quadratic_residual)},
          {"u_fit_residual", num(leaf.u_fit_residual)},
          {"max_first", num(first)},
          {"max_second", num(second)}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

}  // namespace hmin::cli
