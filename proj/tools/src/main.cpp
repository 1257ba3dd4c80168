#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "igsmc_tools/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tempered SMC experiments with information-geometric kernels"};
  std::optional<std::string> config_path, experiment, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<int> threads;
  bool list = false, print_config = false;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--experiment", experiment, "experiment name (overrides the config)");
  app.add_option("--seed", seed, "global seed");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--replicates", replicates, "number of replicates")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
  app.add_flag("--list", list, "list experiment names and exit");
  app.add_flag("--print-config", print_config, "print the resolved config and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& n : igsmc::tools::experiment_names()) std::cout << n << '\n';
    return 0;
  }
  try {
    nlohmann::json j = nlohmann::json::object();
    if (config_path) {
      std::ifstream in(*config_path);
      if (!in) throw std::runtime_error("cannot read config " + *config_path);
      j = nlohmann::json::parse(in);
    }
    if (experiment) j["name"] = *experiment;
    if (!j.contains("name")) throw std::runtime_error("no experiment given (--experiment or config 'name')");
    if (seed) j["seed"] = *seed;
    if (out_dir) j["out_dir"] = *out_dir;
    if (replicates) j["replicates"] = *replicates;
    if (threads) j["threads"] = *threads;
    const auto spec = igsmc::tools::spec_from_json(j);
    spec.validate();
    if (print_config) {
      std::cout << igsmc::tools::to_json(spec).dump(2) << '\n';
      return 0;
    }
    igsmc::tools::run_experiment(spec);
    std::cout << "wrote " << spec.out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
