#ifndef HMIN_TOOLS_COMMANDS_HPP
#define HMIN_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hmin::cli {

enum ExitCode : int { kOk = 0, kUsageOrData = 1, kNonConvergence = 2 };

/// Subcommands that take a config file.
const std::vector<std::string>& command_names();

/// Runs `name` on the config at `config_path`, writing into the resolved output directory.
/// Errors are reported on `err` and mapped to exit codes; nothing escapes.
int run_command(const std::string& name, const std::filesystem::path& config_path, std::ostream& out,
                std::ostream& err);

/// Prints the catalog, one "name<TAB>description" per line.
int list_catalog(std::ostream& out);

}  // namespace hmin::cli

#endif  // HMIN_TOOLS_COMMANDS_HPP
