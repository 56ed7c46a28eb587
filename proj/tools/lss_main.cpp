#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lss/app/commands.hpp"

int main(int argc, char** argv) {
  using namespace lss::app;
  CLI::App app{"Constrained Langevin samplers on level sets"};
  app.set_version_flag("--version", LSS_VERSION);
  app.require_subcommand(1);

  std::string config;
  Overrides ov;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "TOML config file")->required();
    sub->add_option("--seed", seed, "override scheme.seed");
    sub->add_option("--threads", threads, "override run.threads");
    sub->add_option("--out-dir", out_dir, "override output.dir");
  };
  auto* run = app.add_subcommand("run", "run chains and write samples and a report");
  auto* density = app.add_subcommand("density", "histogram against the reference densities");
  auto* sweep = app.add_subcommand("sweep", "bias and MSE sweep over h and T");
  add_common(run);
  add_common(density);
  add_common(sweep);

  std::string selector = "all";
  bool corrupt = false;
  auto* verify = app.add_subcommand("verify", "finite-difference and identity checks");
  verify->add_option("selector", selector, "which checks to run")
      ->check(CLI::IsMember(verify_selectors()));
  verify->add_flag("--corrupt", corrupt, "perturb each check as a negative control");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigInvalid;
  }

  for (auto* sub : {run, density, sweep}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) ov.seed = seed;
    if (sub->count("--threads") > 0) ov.threads = threads;
    if (sub->count("--out-dir") > 0) ov.out_dir = out_dir;
  }
  if (run->parsed()) return cmd_run(config, ov, std::cerr);
  if (density->parsed()) return cmd_density(config, ov, std::cerr);
  if (sweep->parsed()) return cmd_sweep(config, ov, std::cerr);
  return cmd_verify(selector, corrupt, std::cout);
}
