#include "landing/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"landing: retraction-free constrained optimization runner"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "solve one config, writing trace.csv and summary.json");
  run->add_option("config", config, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides output.dir)");

  std::uint64_t seed = 0;
  std::string profile = "medium";
  bool inject_fault = false;
  auto* verify = app.add_subcommand("verify", "run the randomized equivalence suite");
  verify->add_option("--seed", seed, "base seed");
  verify->add_option("--profile", profile, "instance sizes")->check(CLI::IsMember({"small", "medium"}));
  verify->add_flag("--inject-fault", inject_fault, "perturb the constraint adjoint (checks failure reporting)");

  std::string bench_dir;
  unsigned jobs = 1;
  auto* bench = app.add_subcommand("bench", "run every .cfg in a directory");
  bench->add_option("config-dir", bench_dir, "directory of configs")->required();
  bench->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return landing::cli::kExitInputError;
  }

  using namespace landing::cli;
  if (*run) {
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    return run_command(config, out, std::cout, std::cerr);
  }
  if (*verify) {
    const auto p = profile == "small" ? landing::SizeProfile::small : landing::SizeProfile::medium;
    return verify_command(seed, p, inject_fault, std::cout, std::cerr);
  }
  return bench_command(bench_dir, jobs, std::cout, std::cerr);
}
