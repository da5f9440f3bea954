#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "leakscope/commands.hpp"
#include "leakscope/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Leak localization diagnostics for parallel pipe networks"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  leakscope::cli::Overrides overrides;

  for (auto name : leakscope::cli::kCommandNames) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory for CSV files")->required();
    sub->add_option("--nominal-dh", overrides.nominal_dh, "Nominal head loss for residual sweeps and confusion flows");
    sub->add_option("--eps-spread", overrides.eps_spread, "Candidate spread tolerance for isolate")
        ->check(CLI::PositiveNumber);
    sub->add_option("--eps-fit", overrides.eps_fit, "Leak-fit rmse acceptance tolerance for leakfit")
        ->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);

  auto const command = leakscope::cli::parse_command(app.get_subcommands().front()->get_name());
  try {
    auto const scenario = leakscope::parse_scenario(scenario_path);
    return leakscope::cli::run(*command, scenario, out_dir, overrides, std::cerr);
  } catch (std::exception const& e) {
    std::cerr << "leakscope: " << e.what() << '\n';
    return 1;
  }
}
