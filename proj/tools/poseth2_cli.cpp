#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "poseth2/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"H2-optimal poset-causal state-feedback synthesis"};
  app.require_subcommand(1);

  poseth2::Config config;
  bool no_parallel = false;
  std::string plant_path, result_path;

  auto* synth = app.add_subcommand("synth", "synthesize a controller and write the result file");
  synth->add_option("plant", plant_path, "plant JSON")->required();
  synth->add_option("result", result_path, "result JSON to write")->required();
  synth->add_option("--atol", config.atol, "zero tolerance for plant incidence checks")
      ->capture_default_str();
  synth->add_option("--freq-samples", config.freq_samples, "number of sample frequencies")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--margin", config.stability_margin, "stability margin")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  synth->add_flag("--no-parallel", no_parallel, "solve the subproblems sequentially");

  auto* verify = app.add_subcommand("verify", "re-check a stored controller against its plant");
  verify->add_option("plant", plant_path, "plant JSON")->required();
  verify->add_option("result", result_path, "result JSON")->required();

  auto* report = app.add_subcommand("report", "print a readable summary of a result file");
  report->add_option("result", result_path, "result JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : poseth2::cli::kInputError;
  }

  poseth2::cli::configure_logging();
  config.parallel = !no_parallel;
  if (*synth) return poseth2::cli::cmd_synth(plant_path, result_path, config, std::cout, std::cerr);
  if (*verify) return poseth2::cli::cmd_verify(plant_path, result_path, std::cout, std::cerr);
  return poseth2::cli::cmd_report(result_path, std::cout, std::cerr);
}
