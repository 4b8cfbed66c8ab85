// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// gdssm <command> [--config FILE] [--key value ...]
//
// Keys are accepted in dotted form (--train.lr_ssm) and by their leaf name
// with dashes (--lr-ssm) when the leaf is unique. Flags override the file.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <set>

#include "gdssm/runner.hpp"

int main(int argc, char** argv) {
  using namespace gdssm;
  CLI::App app{"GD-SSM construction checks, training and evaluation"};
  app.require_subcommand(1);

  std::map<std::string, int> leaf_uses;
  for (const auto& k : config_keys()) ++leaf_uses[leaf_flag(k.key)];

  struct Bound {
    CLI::App* sub;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  const std::map<std::string, std::string> help{
      {"verify", "construction vs oracle equivalence suite and gradient checks"},
      {"train", "meta-train a model; writes history, checkpoint and manifest"},
      {"eval", "query loss of trained, constructed and oracle predictors"},
      {"ablate", "train the full model and each single ablation on one budget"},
      {"sweep", "loss across input scales or feature dimensions"},
      {"compare", "prediction and sensitivity agreement with the GD oracle"},
  };
  for (const auto& name : command_names()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(name, help.at(name));
    b->sub->add_option("--config,-c", b->config_path, "flat key = value config file");
    for (const auto& k : config_keys()) {
      std::string names = "--" + k.key;
      const std::string leaf = leaf_flag(k.key);
      if (leaf_uses[leaf] == 1) names += ",--" + leaf;
      std::string text = k.help + " [" + k.default_value + "]";
      b->options[k.key] = b->sub->add_option(names, b->values[k.key], text);
    }
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (const auto& b : bound) {
    if (!b->sub->parsed()) continue;
    RunConfig cfg;
    try {
      if (!b->config_path.empty()) apply_config_file(cfg, b->config_path);
      for (const auto& [key, opt] : b->options)
        if (opt->count()) cfg.set(key, b->values[key]);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitUsage;
    }
    try {
      const RunOutcome out = run_command(b->sub->get_name(), cfg, std::cout);
      std::cout << "manifest: " << out.manifest_path << '\n';
      if (out.exit_code == kExitCheckFailed) std::cerr << "failed property: " << out.failure << '\n';
      return out.exit_code;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitError;
    }
  }
  return kExitUsage;
}
