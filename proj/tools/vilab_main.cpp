#include <iostream>

#include "CLI11.hpp"

#include "vilab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vilab: discretized VI and QVI experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vilab::cli::kVersion);

  std::string config;
  vilab::cli::RunOptions options;
  std::string out_dir = "results";
  auto* run = app.add_subcommand("run", "run the study described by a JSON config");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_flag("--dry-run", options.dry_run, "validate and print the plan without solving");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_flag("--plot", options.plot, "also write an SVG plot");

  auto* list = app.add_subcommand("list", "list study kinds");
  std::string kind;
  auto* describe = app.add_subcommand("describe", "show the config keys of a study kind");
  describe->add_option("kind", kind)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*list) {
    std::cout << vilab::cli::list_studies();
    return 0;
  }
  if (*describe) {
    try {
      std::cout << vilab::cli::describe(kind);
    } catch (const vilab::cli::ConfigError& e) {
      std::cerr << e.what() << '\n';
      return 2;
    }
    return 0;
  }
  options.out_dir = out_dir;
  return vilab::cli::run(config, options, std::cout, std::cerr);
}
