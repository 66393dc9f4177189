#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "predlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"predlab: delay-embedding predictability and dimension experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the available experiments");
  auto* run = app.add_subcommand("run", "Run one experiment");

  std::string experiment;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string config_path;
  std::string out_dir;
  run->add_option("--experiment,-e", experiment, "Experiment id (E1..E6 or full name)");
  run->add_option("--seed,-s", seed, "RNG seed")->each([&](const std::string&) { seed_given = true; });
  run->add_option("--config,-c", config_path, "key = value config file")->check(CLI::ExistingFile);
  run->add_option("--out,-o", out_dir, "Output directory (default runs/<experiment>)");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (auto id : predlab::all_experiments()) {
      std::cout << predlab::to_string(id) << "  " << predlab::describe(id) << "\n";
    }
    return 0;
  }

  try {
    predlab::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream text;
      text << in.rdbuf();
      std::string body = text.str();
      // The command line may supply the experiment the file leaves out.
      if (body.find("experiment") == std::string::npos && !experiment.empty()) {
        body = "experiment = " + experiment + "\n" + body;
      }
      cfg = predlab::parse_config(body);
      if (!experiment.empty()) cfg.id = predlab::parse_experiment_id(experiment);
    } else {
      if (experiment.empty()) {
        std::cerr << "error: --experiment or --config is required\n";
        return 2;
      }
      cfg.id = predlab::parse_experiment_id(experiment);
    }
    if (seed_given) cfg.seed = seed;
    const std::string dir =
        out_dir.empty() ? "runs/" + std::string(predlab::to_string(cfg.id)) : out_dir;

    const auto summary = predlab::run_experiment(cfg, dir);
    std::cout << summary.to_json();
    for (const auto& [name, ok] : summary.pass_flags) {
      std::printf("%-28s %s\n", name.c_str(), ok ? "PASS" : "FAIL");
    }
    return summary.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
