#include <iostream>

#include "CLI11.hpp"
#include "vds/runner.hpp"

namespace cli = vds::cli;

int main(int argc, char** argv) {
  CLI::App app{"vacancy-like dressed state simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned workers = 0;
  std::string out_dir;
  bool seedless = false;
  app.add_option("--workers", workers, "worker threads (default: config value)");
  app.add_option("--out", out_dir, "output directory (default: config value)");
  app.add_flag("--seedless", seedless, "reserved; the pipeline uses no random numbers");
  app.set_version_flag("--version", std::string(cli::kToolVersion));

  std::string path;
  auto* run = app.add_subcommand("run", "run a single scenario");
  run->add_option("config", path, "config file")->required();
  auto* sweep = app.add_subcommand("sweep", "run the sweep grid of a scenario");
  sweep->add_option("config", path, "config file")->required();
  auto* check = app.add_subcommand("validate", "check a config without running it");
  check->add_option("config", path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const cli::ScenarioConfig cfg = cli::load_config(path);
    if (check->parsed()) {
      std::cout << "ok: scenario " << cfg.scenario << ", " << cfg.grid_size() << " grid point"
                << (cfg.grid_size() == 1 ? "" : "s") << "\n";
      return 0;
    }
    if (run->parsed() && !cfg.sweep.empty()) {
      std::cerr << "error: config defines a sweep; use 'vdsim sweep'\n";
      return 1;
    }
    if (sweep->parsed() && cfg.sweep.empty()) {
      std::cerr << "error: config has no sweep axes; use 'vdsim run'\n";
      return 1;
    }
    cli::RunOptions opt;
    opt.workers = workers > 0 ? workers : cfg.workers;
    opt.out_dir = out_dir;
    opt.seedless = seedless;
    const auto rec = cli::execute(cfg, opt);
    std::cout << cfg.scenario << ": wrote " << rec.checksums.size() + 1 << " files to "
              << rec.out_dir << " in " << rec.wall_seconds << " s"
              << (rec.ok ? "" : " (with errors, see results.json)") << "\n";
    return rec.ok ? 0 : 2;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
