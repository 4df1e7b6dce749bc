// Command-line front end: pretrain critics, run deployments, compare the
// two algorithms, and regenerate reports from raw results.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 runtime failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcac/bench.hpp"
#include "mcac/critic_store.hpp"
#include "mcac/error.hpp"
#include "mcac/gridworld.hpp"
#include "mcac/mdp.hpp"

namespace fs = std::filesystem;

namespace {

std::string timestamp_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::vector<mcac::CriticArtifact> load_bank_dir(const fs::path& dir,
                                                const mcac::ScenarioSet& set) {
  std::vector<mcac::CriticArtifact> artifacts;
  // Keyed by scenario order so weight indices follow the scenario file.
  for (const auto& sc : set.pretrained) {
    const fs::path path = dir / (sc.name + ".critic");
    if (!fs::exists(path))
      throw mcac::DataError("missing critic artifact " + path.string() +
                            " (run `mcac pretrain` first)");
    artifacts.push_back(mcac::load_critic(path));
  }
  return artifacts;
}

void print_effective_config(const mcac::ExperimentConfig& cfg) {
  std::cout << "runs = " << cfg.runs << "\n"
            << "episodes = " << cfg.episodes << "\n"
            << "base-seed = " << cfg.base_seed << "\n"
            << "gamma = " << cfg.gamma << "\n"
            << "max-steps = " << cfg.max_steps_per_episode << "\n"
            << "td-sign = "
            << (cfg.td_sign == mcac::TdSign::Prose ? "prose" : "algorithm1")
            << "\n"
            << "critic-reward-source = "
            << (cfg.reward_source == mcac::CriticRewardSource::CurrentEnv
                    ? "current-env"
                    : "per-critic-tables")
            << "\n"
            << "parallel-runs = " << cfg.parallel_runs << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular actor-critic laboratory with multi-critic transfer"};
  app.require_subcommand(1);

  std::string scenarios_file, config_file, bank_dir, out_dir, results_dir;
  std::string algorithm = "ac";
  // Flag overrides; applied on top of config-file values (flags > config
  // > built-ins).
  std::uint64_t runs = 0, episodes = 0, seed = 0;
  unsigned parallel = 0;
  double gamma = -1.0;
  const char* default_out = std::getenv("MCAC_OUT_DIR");

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("--scenarios", scenarios_file, "scenario file")
      ->required();

  auto* pretrain = app.add_subcommand(
      "pretrain", "Train baseline critics on the pre-trained scenarios");
  pretrain->add_option("--scenarios", scenarios_file)->required();
  pretrain->add_option("--out", out_dir)->required();
  pretrain->add_option("--episodes", episodes, "training episodes per scenario");
  pretrain->add_option("--seed", seed);
  pretrain->add_option("--gamma", gamma);

  auto* deploy = app.add_subcommand(
      "deploy", "Run one algorithm on the deployment scenarios");
  deploy->add_option("--scenarios", scenarios_file)->required();
  deploy->add_option("--algorithm", algorithm, "ac or mcac");
  deploy->add_option("--bank", bank_dir, "critic artifact directory (mcac)");
  deploy->add_option("--config", config_file);
  deploy->add_option("--out", out_dir);
  deploy->add_option("--runs", runs);
  deploy->add_option("--episodes", episodes);
  deploy->add_option("--seed", seed);
  deploy->add_option("--gamma", gamma);
  deploy->add_option("--parallel-runs", parallel);

  auto* compare = app.add_subcommand(
      "compare", "Run AC and MCAC on the deployments and report speedups");
  compare->add_option("--scenarios", scenarios_file)->required();
  compare->add_option("--bank", bank_dir)->required();
  compare->add_option("--config", config_file);
  compare->add_option("--out", out_dir);
  compare->add_option("--runs", runs);
  compare->add_option("--episodes", episodes);
  compare->add_option("--seed", seed);
  compare->add_option("--gamma", gamma);
  compare->add_option("--parallel-runs", parallel);

  auto* report = app.add_subcommand(
      "report", "Regenerate summary and curves from raw results");
  report->add_option("--results", results_dir)->required();
  report->add_option("--out", out_dir, "defaults to the results directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    mcac::ExperimentConfig cfg;
    if (!config_file.empty()) cfg = mcac::load_experiment_config(config_file);
    if (runs) cfg.runs = runs;
    if (episodes) cfg.episodes = episodes;
    if (seed) cfg.base_seed = seed;
    if (gamma > 0.0) cfg.gamma = gamma;
    if (parallel) cfg.parallel_runs = parallel;
    if (out_dir.empty() && default_out) out_dir = default_out;

    if (validate_cmd->parsed()) {
      const auto set = mcac::load_scenario_file(scenarios_file);
      for (const auto& sc : set.pretrained) {
        const auto report_v = mcac::validate(mcac::compile(sc, set.gamma));
        if (!report_v.ok())
          throw mcac::DataError("compiled pretrained '" + sc.name +
                                "' invalid: " + report_v.violations.front());
      }
      for (const auto& sc : set.deployments) {
        const auto report_v = mcac::validate(mcac::compile(sc, set.gamma));
        if (!report_v.ok())
          throw mcac::DataError("compiled deployment '" + sc.name +
                                "' invalid: " + report_v.violations.front());
      }
      std::cout << "OK: " << set.pretrained.size() << " pretrained, "
                << set.deployments.size() << " deployment scenarios\n";
      return 0;
    }

    if (pretrain->parsed()) {
      const auto set = mcac::load_scenario_file(scenarios_file);
      if (gamma <= 0.0) cfg.gamma = set.gamma;
      const std::uint64_t train_episodes = episodes ? episodes : 20000;
      const auto artifacts =
          mcac::pretrain_artifacts(set, cfg, train_episodes, timestamp_now());
      fs::create_directories(out_dir);
      for (const auto& artifact : artifacts) {
        const fs::path path = fs::path(out_dir) / (artifact.scenario_name + ".critic");
        mcac::save_critic(artifact, path);
        std::cout << "wrote " << path.string() << "\n";
      }
      return 0;
    }

    if (deploy->parsed() || compare->parsed()) {
      const auto set = mcac::load_scenario_file(scenarios_file);
      if (gamma <= 0.0 && config_file.empty()) cfg.gamma = set.gamma;
      if (deploy->parsed()) {
        if (algorithm == "ac") {
          cfg.run_ac = true;
          cfg.run_mcac = false;
        } else if (algorithm == "mcac") {
          cfg.run_ac = false;
          cfg.run_mcac = true;
        } else {
          std::cerr << "error: --algorithm must be ac or mcac\n";
          return 1;
        }
      }
      std::vector<mcac::CriticArtifact> artifacts;
      if (cfg.run_mcac) {
        if (bank_dir.empty())
          throw mcac::DataError("MCAC needs --bank pointing at pretrained critics");
        artifacts = load_bank_dir(bank_dir, set);
      }
      if (out_dir.empty()) out_dir = "mcac-out";
      print_effective_config(cfg);
      const auto raw = mcac::run_experiment(set, artifacts, cfg);
      mcac::save_raw_results(raw, out_dir);
      // Aggregate from the persisted files so `report` reproduces the
      // summary bit-for-bit.
      const auto reloaded = mcac::load_raw_results(out_dir);
      mcac::emit_reports(mcac::speedups(reloaded), out_dir);
      std::cout << "results in " << out_dir << "\n";
      return 0;
    }

    if (report->parsed()) {
      if (out_dir.empty()) out_dir = results_dir;
      const auto raw = mcac::load_raw_results(results_dir);
      mcac::emit_reports(mcac::speedups(raw), out_dir);
      std::cout << "report in " << out_dir << "\n";
      return 0;
    }
  } catch (const mcac::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
