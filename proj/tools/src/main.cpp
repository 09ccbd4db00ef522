#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hmin: vanishing-viscosity solver and diagnostics for intrinsic minimal graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hmin 0.1.0");

  std::string config;
  bool list = false;
  for (const std::string& name : hmin::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run '" + name + "' on a config file");
    if (name == "example") {
      sub->add_flag("--list", list, "print the catalog and exit");
      sub->add_option("config", config, "JSON config file")->check(CLI::ExistingFile);
    } else {
      sub->add_option("config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 returns 0 for --help; everything else is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : hmin::cli::kUsageOrData;
  }

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->get_name() == "example" && list) return hmin::cli::list_catalog(std::cout);
  if (config.empty()) {
    std::cerr << "error: " << sub->get_name() << " needs a config file\n";
    return hmin::cli::kUsageOrData;
  }
  return hmin::cli::run_command(sub->get_name(), config, std::cout, std::cerr);
}
