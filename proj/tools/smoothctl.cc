// smoothctl: train, evaluate, compare, verify and plot smoothness experiments.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "smooth/core/errors.h"
#include "smooth/core/runtime.h"
#include "smooth/harness/commands.h"

namespace {

using namespace smooth;

// "key=value" pairs for --set.
EnvSettings parse_settings(const std::vector<std::string>& items) {
  EnvSettings out;
  for (const std::string& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--set expects key=value, got '" + item + "'");
    }
    try {
      std::size_t used = 0;
      std::string value = item.substr(eq + 1);
      out[item.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw UsageError("--set value is not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Action-smoothness experiments for PPO policies"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t threads = 0;
  auto* train = app.add_subcommand("train", "train every seed of a config");
  train->add_option("-c,--config", config_path, "experiment config")->required();
  train->add_option("-t,--threads", threads,
                    "worker slots (default SMOOTHCTL_THREADS or all cores)");

  std::string checkpoint;
  std::size_t episodes = 10;
  std::uint64_t seed = 0;
  std::string output;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("-k,--checkpoint", checkpoint, "checkpoint.json")->required();
  eval->add_option("-c,--config", config_path, "config with the environment")
      ->required();
  eval->add_option("-n,--episodes", episodes, "episodes")->capture_default_str();
  eval->add_option("-s,--seed", seed, "first episode seed")->capture_default_str();
  eval->add_option("-o,--output", output, "also write the report here");

  std::vector<std::string> dirs;
  std::string baseline;
  auto* compare = app.add_subcommand("compare", "tabulate runs against a baseline");
  compare->add_option("dirs", dirs, "experiment or seed directories")->required();
  compare->add_option("-b,--baseline", baseline, "baseline method name")
      ->required();
  compare->add_option("-o,--output", output,
                      "write <output>.md and <output>.csv");

  VerifyOptions verify_opts;
  std::vector<std::string> settings;
  auto* verify = app.add_subcommand("verify", "check the similar-state bound");
  verify->add_option("env", verify_opts.env, "environment name")->required();
  verify->add_option("--set", settings, "environment key=value overrides");
  verify->add_option("--anchors", verify_opts.anchors)->capture_default_str();
  verify->add_option("--samples", verify_opts.samples)->capture_default_str();
  verify->add_option("--pairs", verify_opts.pairs)->capture_default_str();
  verify->add_option("--seed", verify_opts.seed)->capture_default_str();
  verify->add_option("-k,--checkpoint", checkpoint, "policy for the ratio probe");

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "write SVG plots for a run directory");
  plot->add_option("dir", plot_dir, "experiment or seed directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    auto maybe = [](const std::string& s) {
      return s.empty() ? std::nullopt
                       : std::optional<std::filesystem::path>(s);
    };
    if (*train) {
      return cmd_train(config_path, threads > 0 ? threads : worker_threads(),
                       std::cout);
    }
    if (*eval) {
      return cmd_eval(checkpoint, config_path, episodes, seed, maybe(output),
                      std::cout);
    }
    if (*compare) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      return cmd_compare(paths, baseline, maybe(output), std::cout);
    }
    if (*verify) {
      verify_opts.settings = parse_settings(settings);
      verify_opts.checkpoint = maybe(checkpoint);
      return cmd_verify(verify_opts, std::cout);
    }
    if (*plot) return cmd_plot(plot_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
