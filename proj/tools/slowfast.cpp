#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "slowfast/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Slow-fast prey-predator model: analysis, cycle sweeps and spatial simulation"};
  cli.require_subcommand(1);
  std::string config_path, out_dir = ".";
  for (const char* name : {"analyze", "sweep", "simulate", "entry-exit"}) {
    auto* sub = cli.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
  }
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : slowfast::app::kExitConfig;
  }
  const std::string command = cli.get_subcommands().front()->get_name();
  return slowfast::app::run(command, config_path, out_dir, std::cerr);
}
