#include "compsolve/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
  compsolve::RunConfig cfg;
  std::string input;
  std::string out = ".";

  CLI::App app{"Surrogate-comparison nonlinear solver"};
  app.require_subcommand(1);
  for (const auto& name : compsolve::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--input", input, "problem file (JSON)")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", cfg.seed, "sampler seed");
    sub->add_option("--set", cfg.overrides, "override key=value (dotted keys)")->take_all();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : compsolve::ExitConfig;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  cfg.input_path = input;
  cfg.output_dir = out;
  return compsolve::run(cfg, std::cout);
}
