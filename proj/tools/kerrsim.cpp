// Command-line driver: one subcommand per scenario kind plus `run`, which
// takes the kind from the configuration itself.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "kerrpdc/closed_dynamics.hpp"
#include "kerrpdc/open_dynamics.hpp"
#include "kerrpdc/scenario.hpp"
#include "kerrpdc/three_state.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::string preset;
  std::string out = ".";
  int workers = 1;
  bool dry_run = false;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
  auto* config = cmd->add_option("--config", args.config, "key = value configuration file")
                     ->check(CLI::ExistingFile);
  auto* preset = cmd->add_option("--preset", args.preset, "built-in recipe (fig1 ... fig8)");
  config->excludes(preset);
  cmd->add_option("--out", args.out, "output directory")->capture_default_str();
  cmd->add_option("--workers", args.workers, "threads for sweep scenarios")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--dry-run", args.dry_run, "validate and print the configuration, run nothing");
}

int execute(const RunArgs& args, std::optional<kerrpdc::ScenarioKind> expected) {
  using namespace kerrpdc;
  if (args.config.empty() && args.preset.empty()) {
    throw ConfigError("config", "give --config PATH or --preset NAME");
  }
  const ScenarioConfig cfg =
      args.preset.empty() ? load_config_file(args.config) : load_preset(args.preset);
  if (expected && cfg.kind != *expected) {
    throw ConfigError("scenario", "configuration is '" + to_string(cfg.kind) +
                                      "' but the subcommand is '" + to_string(*expected) + "'");
  }
  if (args.dry_run) {
    std::cout << format_config(cfg);
    return 0;
  }
  std::cerr << to_string(cfg.kind) << " '" << cfg.name << "' -> " << args.out << "\n";
  const ScenarioResult result = run_scenario(cfg, args.out, args.workers, &std::cerr);
  for (const auto& f : result.files) std::cout << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using kerrpdc::ScenarioKind;
  CLI::App app{"Pumped Kerr oscillator pair: entanglement and intensity-correlation runs"};
  app.require_subcommand(1);

  RunArgs args;
  std::optional<ScenarioKind> expected;
  const std::pair<const char*, const char*> kinds[] = {
      {"closed", "undamped pure-state evolution"},
      {"analytic-compare", "three-level closed form against the full evolution"},
      {"open", "master-equation evolution with damping"},
      {"gamma-sweep", "open runs over a damping grid"},
      {"nbar-sweep", "open runs over a thermal-occupation grid"},
  };
  for (const auto& [name, help] : kinds) {
    auto* cmd = app.add_subcommand(name, help);
    add_run_options(cmd, args);
    const ScenarioKind kind = kerrpdc::parse_scenario_kind(name);
    cmd->callback([&expected, kind] { expected = kind; });
  }
  auto* run = app.add_subcommand("run", "run whatever scenario the configuration names");
  add_run_options(run, args);

  auto* list = app.add_subcommand("presets", "list built-in recipes");
  std::string show;
  list->add_option("--show", show, "print one preset's text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      if (!show.empty()) {
        std::cout << kerrpdc::preset_text(show);
      } else {
        for (const auto& n : kerrpdc::preset_names()) {
          std::cout << n << "  " << kerrpdc::to_string(kerrpdc::load_preset(n).kind) << "\n";
        }
      }
      return 0;
    }
    return execute(args, expected);
  } catch (const kerrpdc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const kerrpdc::PositivityError& e) {
    std::cerr << "positivity lost at t = " << e.time() << ": " << e.what() << "\n";
    return 3;
  } catch (const kerrpdc::StepSizeError& e) {
    std::cerr << "step size too large at t = " << e.time() << ": " << e.what() << "\n";
    return 3;
  } catch (const kerrpdc::BranchError& e) {
    std::cerr << "three-level solution: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
