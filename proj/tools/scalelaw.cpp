// scalelaw: batch front-end for the solvers and the simulator.

#include <CLI11.hpp>

#include <iostream>

#include "scalelaw/io.hpp"
#include "scalelaw/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Solvers for randomly projected linear models"};
  app.set_version_flag("--version", scalelaw::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the configured solver (honours [sweep])");
  run->add_option("config", config_path, "Config file")->required();

  std::string parameter, values;
  auto* sweep = app.add_subcommand("sweep", "One run per value of a parameter");
  sweep->add_option("config", config_path, "Config file")->required();
  sweep->add_option("--param", parameter, "N, P, B, E, eta, a or b (default: [sweep] parameter)");
  sweep->add_option("--values", values, "Comma separated values (default: [sweep] values)");

  auto* check = app.add_subcommand("validate", "Parse and check a config without running");
  check->add_option("config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    scalelaw::RunConfig cfg = scalelaw::load_config(config_path);
    if (*check) {
      scalelaw::build_shape(cfg, scalelaw::build_spectrum(cfg));
      std::cout << "ok: solver " << scalelaw::to_string(cfg.solver) << ", sha256 " << cfg.hash
                << "\n";
      return 0;
    }
    if (*sweep) {
      std::string p = parameter.empty() ? cfg.sweep_parameter : parameter;
      if (p.empty()) throw scalelaw::ConfigError("sweep needs --param or [sweep] parameter");
      std::vector<double> v =
          sweep->count("--values") ? scalelaw::parse_list(values) : cfg.sweep_values;
      return scalelaw::execute_sweep(cfg, p, v, std::cerr);
    }
    return scalelaw::execute(cfg, std::cerr);
  } catch (const scalelaw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
