#ifndef HMIN_TOOLS_JSON_IO_HPP
#define HMIN_TOOLS_JSON_IO_HPP

#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

#include "hmin/diagnostics.hpp"
#include "hmin/foliation.hpp"
#include "hmin/solver.hpp"
#include "run_config.hpp"

namespace hmin::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Config hash plus versions of hmin and its dependencies.
json provenance(const RunConfig& config);

json to_json(const IterationRecord& r);
json to_json(const SolveReport& r);
/// Schema: {eps, M, norms{w22, d2u_w12, wmp}, holder[{alpha, seminorm}]}.
json to_json(const NormLedgerRow& row);
json to_json(const RegularityVerdict& v);
/// Fit summary of one leaf together with sup |first|, |second| of its Lie derivatives.
json leaf_summary(const Leaf& leaf, const std::vector<LieDerivativeSample>& lie);

/// Pretty-printed with a trailing newline. Non-finite doubles are written as null.
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace hmin::cli

#endif  // HMIN_TOOLS_JSON_IO_HPP
