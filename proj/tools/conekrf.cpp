#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conekrf/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Twisted conical Kahler-Ricci flow lab on the radial CP1 model"};
  cli.require_subcommand(1);

  conekrf::RunManifest manifest;
  std::string out;
  const std::pair<const char*, conekrf::Command> commands[] = {
      {"run", conekrf::Command::Run},           {"sweep-gamma", conekrf::Command::SweepGamma},
      {"sweep-eps", conekrf::Command::SweepEps}, {"validate", conekrf::Command::Validate},
      {"mms", conekrf::Command::Mms},           {"compare", conekrf::Command::Compare},
      {"report", conekrf::Command::Report},
  };
  const char* help[] = {
      "Run one flow and write its trajectory",
      "Conical runs down the gamma ladder against the cusp flow",
      "Ordering chain against the regularized flows",
      "The seven fitted-constant validators over the gamma ladder",
      "Manufactured-solution order study and domain truncation",
      "Sub-solution barrier, cusp reference and contraction pairs",
      "Aggregate every estimates.json under --out",
  };
  int k = 0;
  for (const auto& [name, cmd] : commands) {
    auto* sub = cli.add_subcommand(name, help[k++]);
    if (cmd != conekrf::Command::Report)
      sub->add_option("--config", manifest.config_path, "Config file (flat dotted keys)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output root (default $CONEKRF_OUT_DIR or ./conekrf-out)");
    sub->add_option("--seed", manifest.seed, "Seed for random initial data and pairs");
    sub->add_option("--jobs", manifest.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    sub->callback([&manifest, cmd = cmd] { manifest.command = cmd; });
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e);
  }
  manifest.out_dir = out;
  try {
    return conekrf::execute(manifest, std::cout).status;
  } catch (const conekrf::ConfigError& e) {
    std::cerr << conekrf::error_json(e) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << conekrf::error_json(e) << "\n";
    return 1;
  }
}
