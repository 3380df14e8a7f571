// Command-line front end: five subcommands (potential, reduced, bifurcate,
// simulate, validate) driven by a dotted-key config file.
//
// Exit codes: 0 = success, 1 = configuration/runtime error, 2 = validation
// verdict failed.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "bspulse/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"geometry-induced pulse dynamics toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress notes");

  auto* sub_potential = app.add_subcommand("potential", "tabulate E(s0; w)");
  auto* sub_reduced = app.add_subcommand("reduced", "integrate the reduced ODEs");
  auto* sub_bifurcate =
      app.add_subcommand("bifurcate", "trace equilibrium branches");
  auto* sub_simulate =
      app.add_subcommand("simulate", "run the surface PDE validator");
  auto* sub_validate =
      app.add_subcommand("validate", "compare PDE drift against the slow ODE");
  // let the global options (--config etc.) appear after the subcommand too
  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    bspulse::cli::RunContext ctx;
    ctx.cfg = bspulse::cli::Config::from_file(config_path);
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.quiet = quiet;
    std::filesystem::create_directories(ctx.out_dir);

    if (sub_potential->parsed()) return bspulse::cli::cmd_potential(ctx);
    if (sub_reduced->parsed()) return bspulse::cli::cmd_reduced(ctx);
    if (sub_bifurcate->parsed()) return bspulse::cli::cmd_bifurcate(ctx);
    if (sub_simulate->parsed()) return bspulse::cli::cmd_simulate(ctx);
    if (sub_validate->parsed()) return bspulse::cli::cmd_validate(ctx);
    std::fprintf(stderr, "no subcommand selected\n");
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
