// accelopt: run, compare and verify accelerated flows and their discretizations.

#include "accel/app/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  using namespace accel::app;
  CLI::App app{"Accelerated optimization by singular feedback control of a double integrator"};
  app.require_subcommand(1);

  Overrides ov;
  std::string out_dir;
  int stride = 0;
  std::uint64_t seed = 0;
  auto* opt_out = app.add_option("--out-dir", out_dir, "Directory for artifacts (overrides output.dir)");
  auto* opt_stride =
      app.add_option("--stride", stride, "Keep every k-th sample (overrides output.stride)")
          ->check(CLI::PositiveNumber);
  auto* opt_seed = app.add_option("--seed-override", seed, "Replace the config seed");

  std::string config;
  auto* run = app.add_subcommand("run", "Run one configuration and write its artifacts");
  run->add_option("config", config, "YAML configuration")->required();

  std::vector<std::string> configs;
  auto* compare = app.add_subcommand("compare", "Tabulate time to each gradient decade");
  compare->add_option("configs", configs, "YAML configurations sharing one problem")->required();

  std::string csv;
  auto* verify = app.add_subcommand("verify", "Re-run the configured checks on a trajectory CSV");
  verify->add_option("trajectory", csv, "Trajectory or iterate CSV")->required();
  verify->add_option("config", config, "Configuration that produced it")->required();

  // Flags are accepted before or after the verb.
  for (auto* sub : {run, compare, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (*opt_out) ov.out_dir = out_dir;
  if (*opt_stride) ov.stride = stride;
  if (*opt_seed) ov.seed = seed;

  try {
    if (*run) return cmd_run(config, ov, std::cout, std::cerr);
    if (*compare) return cmd_compare(configs, ov, std::cout, std::cerr);
    if (*verify) return cmd_verify(csv, config, ov, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "accelopt: " << e.what() << "\n";
    return kRunFailure;
  }
  return kConfigError;
}
